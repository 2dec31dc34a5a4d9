#pragma once

// Static read routing for mirrored layouts in degraded mode. Each logical
// read area is split across the disks that hold it so that the disks sharing
// the extra load end up equally busy. Normal-mode load of every disk is 1.

#include <optional>
#include <string>
#include <vector>

#include "mirrorlab/errors.hpp"
#include "mirrorlab/layout.hpp"
#include "mirrorlab/rational.hpp"

namespace mirrorlab {

struct ReadRouting {
  std::vector<std::string> areas;
  std::vector<Rational> demand;                  // read demand of each area
  std::vector<std::vector<Rational>> fraction;   // [area][disk]
  std::vector<Rational> load;                    // per disk, 0 for failed disks
  std::vector<int> group;                        // load-sharing group, -1 when failed
  std::optional<Rational> secondary_fraction;    // GRD: balanced alpha_k
  std::optional<Rational> secondary_fraction_printed;  // GRD: (M-k)/2M
};

namespace detail {

inline ReadRouting empty_routing(int disks, int areas) {
  ReadRouting r;
  r.areas.resize(static_cast<std::size_t>(areas));
  r.demand.assign(static_cast<std::size_t>(areas), 1);
  r.fraction.assign(static_cast<std::size_t>(areas), std::vector<Rational>(static_cast<std::size_t>(disks), 0));
  r.group.assign(static_cast<std::size_t>(disks), 0);
  return r;
}

inline void finish_loads(ReadRouting& r, const FailureSet& f) {
  const std::size_t n = r.group.size();
  r.load.assign(n, 0);
  for (std::size_t a = 0; a < r.fraction.size(); ++a) {
    for (std::size_t d = 0; d < n; ++d) r.load[d] += r.fraction[a][d] * r.demand[a];
  }
  for (std::size_t d = 0; d < n; ++d) {
    if (f.contains(static_cast<int>(d))) r.group[d] = -1;
  }
}

inline ReadRouting route_bm(const Layout& layout, const FailureSet& f) {
  const int n = layout.disks();
  ReadRouting r = empty_routing(n, n / 2);
  for (int p = 0; p < n / 2; ++p) {
    const int a = 2 * p;
    const int b = 2 * p + 1;
    r.areas[static_cast<std::size_t>(p)] = "pair" + std::to_string(p + 1);
    r.demand[static_cast<std::size_t>(p)] = 2;
    auto& row = r.fraction[static_cast<std::size_t>(p)];
    if (f.contains(a)) {
      row[static_cast<std::size_t>(b)] = 1;
    } else if (f.contains(b)) {
      row[static_cast<std::size_t>(a)] = 1;
    } else {
      row[static_cast<std::size_t>(a)] = Rational(1, 2);
      row[static_cast<std::size_t>(b)] = Rational(1, 2);
    }
    r.group[static_cast<std::size_t>(a)] = p;
    r.group[static_cast<std::size_t>(b)] = p;
  }
  return r;
}

// Area j is disk j's primary; its copy lives on disk j+1. Between two failed
// disks the survivors s_1..s_L carry L+1 areas, and s_t reads t/L of its own
// primary, which gives every survivor in the chain load (L+1)/L.
inline ReadRouting route_cd(const Layout& layout, const FailureSet& f) {
  const int n = layout.disks();
  ReadRouting r = empty_routing(n, n);
  auto at = [&](int area, int disk) -> Rational& {
    return r.fraction[static_cast<std::size_t>(mod(area, n))][static_cast<std::size_t>(mod(disk, n))];
  };
  for (int j = 0; j < n; ++j) r.areas[static_cast<std::size_t>(j)] = "area" + std::to_string(j + 1);
  if (f.empty()) {
    for (int j = 0; j < n; ++j) {
      at(j, j) = Rational(1, 2);
      at(j, j + 1) = Rational(1, 2);
    }
    return r;
  }
  const auto failed = f.disks();
  int group = 0;
  for (std::size_t k = 0; k < failed.size(); ++k) {
    const int start = failed[k];
    const int stop = k + 1 < failed.size() ? failed[k + 1] : failed.front() + n;
    const int len = stop - start - 1;
    if (len <= 0) continue;
    // Area of the failed disk before the chain is only readable at s_1.
    at(start, start + 1) = 1;
    for (int t = 1; t <= len; ++t) {
      const int disk = start + t;
      r.group[static_cast<std::size_t>(mod(disk, n))] = group;
      if (t < len) {
        at(disk, disk) = Rational(t, len);
        at(disk, disk + 1) = 1 - Rational(t, len);
      } else {
        at(disk, disk) = 1;
      }
    }
    ++group;
  }
  return r;
}

// Cluster of n disks; each primary area sends half its reads to the primary
// and 1/(2(n-1)) to each of the n-1 disks holding its pieces. A failed
// disk's area moves to its pieces and the pieces it hosted move back to
// their primaries.
inline ReadRouting route_id(const Layout& layout, const FailureSet& f) {
  const int total = layout.disks();
  const int c = layout.spec().param;
  const int n = total / c;
  ReadRouting r = empty_routing(total, total);
  const Rational piece(1, 2 * (n - 1));
  for (int g = 0; g < c; ++g) {
    int down = -1;
    for (int a = 0; a < n; ++a) {
      if (f.contains(g * n + a)) down = a;
    }
    for (int a = 0; a < n; ++a) {
      const int disk = g * n + a;
      r.areas[static_cast<std::size_t>(disk)] = "area" + std::to_string(disk + 1);
      r.group[static_cast<std::size_t>(disk)] = g;
      auto& row = r.fraction[static_cast<std::size_t>(disk)];
      if (a == down) {
        for (int b = 0; b < n; ++b) {
          if (b != a) row[static_cast<std::size_t>(g * n + b)] = Rational(1, n - 1);
        }
        continue;
      }
      row[static_cast<std::size_t>(disk)] = Rational(1, 2);
      for (int b = 0; b < n; ++b) {
        if (b == a) continue;
        if (b == down) {
          row[static_cast<std::size_t>(disk)] += piece;
        } else {
          row[static_cast<std::size_t>(g * n + b)] = piece;
        }
      }
    }
  }
  return r;
}

// Each primary area (demand 2) is read from its primary disk or from any of
// the M secondary disks, which each hold one row of it. With k primaries
// down, surviving primaries shed alpha = (M-k)/(2M-k) of their reads; with
// k secondaries down each surviving secondary takes 1/(2M-k) of every area.
inline ReadRouting route_grd(const Layout& layout, const FailureSet& f) {
  const int n = layout.disks();
  const int m = n / 2;
  ReadRouting r = empty_routing(n, m);
  int primary_down = 0;
  int secondary_down = 0;
  for (int d : f.disks()) (d < m ? primary_down : secondary_down) += 1;
  if (primary_down > 0 && secondary_down > 0) throw ConstraintError("GRD cannot lose disks on both sides");
  for (int j = 0; j < m; ++j) {
    r.areas[static_cast<std::size_t>(j)] = "area" + std::to_string(j + 1);
    r.demand[static_cast<std::size_t>(j)] = 2;
    auto& row = r.fraction[static_cast<std::size_t>(j)];
    if (secondary_down > 0) {
      const Rational x(1, 2 * m - secondary_down);
      row[static_cast<std::size_t>(j)] = 1 - x * (m - secondary_down);
      for (int s = 0; s < m; ++s) {
        if (!f.contains(m + s)) row[static_cast<std::size_t>(m + s)] = x;
      }
      continue;
    }
    const Rational alpha = f.contains(j) ? Rational(1) : Rational(m - primary_down, 2 * m - primary_down);
    if (!f.contains(j)) row[static_cast<std::size_t>(j)] = 1 - alpha;
    for (int s = 0; s < m; ++s) row[static_cast<std::size_t>(m + s)] = alpha / m;
  }
  if (primary_down > 0) {
    r.secondary_fraction = Rational(m - primary_down, 2 * m - primary_down);
    r.secondary_fraction_printed = Rational(m - primary_down, 2 * m);
  }
  return r;
}

}  // namespace detail

inline ReadRouting degraded_read_fractions(const Layout& layout, const FailureSet& f) {
  check_failure_set(layout, f);
  if (!survives(layout, f)) throw ConstraintError("failure set loses data; no routing exists");
  ReadRouting r;
  switch (layout.kind()) {
    case LayoutKind::bm: r = detail::route_bm(layout, f); break;
    case LayoutKind::cd: r = detail::route_cd(layout, f); break;
    case LayoutKind::id: r = detail::route_id(layout, f); break;
    case LayoutKind::grd: r = detail::route_grd(layout, f); break;
    default:
      throw UnsupportedLayout("degraded read routing is defined for BM, GRD, ID and CD");
  }
  detail::finish_loads(r, f);
  return r;
}

}  // namespace mirrorlab
