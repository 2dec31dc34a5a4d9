#pragma once

#include "mirrorlab/errors.hpp"
#include "mirrorlab/rational.hpp"
#include "mirrorlab/polynomial.hpp"
#include "mirrorlab/gf2.hpp"
#include "mirrorlab/layout.hpp"
#include "mirrorlab/reliability.hpp"
#include "mirrorlab/routing.hpp"
#include "mirrorlab/markov.hpp"
#include "mirrorlab/repair_formulas.hpp"
#include "mirrorlab/queueing.hpp"
#include "mirrorlab/seek.hpp"
#include "mirrorlab/random.hpp"
#include "mirrorlab/stats.hpp"
#include "mirrorlab/mc_reliability.hpp"
#include "mirrorlab/des.hpp"
#include "mirrorlab/report.hpp"
#include "mirrorlab/tables.hpp"
#include "mirrorlab/scenario.hpp"
