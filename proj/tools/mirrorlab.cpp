// mirrorlab: tables, curves, seek estimates and scenario runs.
//
// Exit codes: 0 success, 2 validation error, 3 instability or budget error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mirrorlab/mirrorlab.hpp"

namespace {

using namespace mirrorlab;

struct Output {
  std::string format = "csv";
  std::string path;

  void emit(const Table& t) const {
    const Format f = parse_format(format);
    if (path.empty()) {
      write_table(std::cout, t, f);
      return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("out", "cannot write " + path);
    write_table(out, t, f);
  }

  void emit_text(const std::string& text) const {
    if (path.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("out", "cannot write " + path);
    out << text;
  }
};

void add_output(CLI::App* cmd, Output& out) {
  cmd->add_option("--format", out.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--out", out.path, "write to a file instead of stdout");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"mirrorlab: reliability and performance of mirrored and hybrid disk arrays"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  Output out;
  int n = 8;
  std::uint64_t seed = 1;
  std::uint64_t trials = 0;

  // table
  auto* table = app.add_subcommand("table", "MTTDL or epsilon table over the built-in layouts");
  std::string table_name;
  table->add_option("name", table_name, "mttdl or epsilon")->required()->check(CLI::IsMember({"mttdl", "epsilon"}));
  table->add_option("--n", n, "number of disks")->check(CLI::Range(2, 64));
  add_output(table, out);

  // curve
  auto* curve = app.add_subcommand("curve", "reliability against t/MTTF");
  std::string curve_layouts;
  double t_max = 3;
  double step = 0.05;
  curve->add_option("--layout", curve_layouts, "comma separated layouts");
  curve->add_option("--n", n, "number of disks")->check(CLI::Range(2, 64));
  curve->add_option("--t-max", t_max, "largest t/MTTF");
  curve->add_option("--step", step, "sampling step");
  bool show_crossovers = false;
  curve->add_flag("--crossovers", show_crossovers, "emit pairwise crossover times instead of the curve");
  add_output(curve, out);

  // run
  auto* runcmd = app.add_subcommand("run", "run a scenario file");
  std::string scenario_path;
  std::string run_layout;
  runcmd->add_option("scenario", scenario_path, "INI scenario")->required()->check(CLI::ExistingFile);
  runcmd->add_option("--seed", seed, "override the scenario seed");
  runcmd->add_option("--trials", trials, "override trials, samples or arrivals");
  runcmd->add_option("--n", n, "override layout.disks");
  runcmd->add_option("--layout", run_layout, "override layout.name");
  runcmd->add_option("--format", out.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  runcmd->add_option("--out", out.path, "write to a file instead of stdout");

  // layout
  auto* layout = app.add_subcommand("layout", "export or import layout documents");
  layout->require_subcommand(1);
  auto* lexport = layout->add_subcommand("export", "write a built-in layout as JSON");
  std::string layout_name;
  std::optional<int> layout_param;
  lexport->add_option("--layout", layout_name, "layout name")->required();
  lexport->add_option("--n", n, "number of disks")->check(CLI::Range(1, 64));
  lexport->add_option("--param", layout_param, "layout parameter");
  lexport->add_option("--out", out.path, "write to a file instead of stdout");
  auto* limport = layout->add_subcommand("import", "validate a layout document and report its profile");
  std::string layout_file;
  limport->add_option("file", layout_file, "layout JSON")->required()->check(CLI::ExistingFile);
  add_output(limport, out);

  // seek
  auto* seek = app.add_subcommand("seek", "seek distances: closed form and Monte Carlo");
  std::string seek_kind = "all";
  int seek_k = 2;
  std::uint64_t samples = 1'000'000;
  seek->add_option("--kind", seek_kind, "seek model or all");
  seek->add_option("--k", seek_k, "replication degree");
  seek->add_option("--trials", samples, "Monte Carlo samples");
  seek->add_option("--seed", seed, "random seed");
  add_output(seek, out);

  // mc
  auto* mc = app.add_subcommand("mc", "Monte Carlo MTTDL of a layout");
  std::string mc_layout = "raid5";
  double mttf = 1e6;
  double mttr = 10;
  std::uint64_t mc_trials = 10000;
  mc->add_option("--layout", mc_layout, "layout name");
  mc->add_option("--n", n, "number of disks")->check(CLI::Range(2, 64));
  mc->add_option("--mttf", mttf, "hours");
  mc->add_option("--mttr", mttr, "hours, 0 for no repair");
  mc->add_option("--trials", mc_trials, "trials");
  mc->add_option("--seed", seed, "random seed");
  add_output(mc, out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (table->parsed()) {
    out.emit(table_name == "mttdl" ? mttdl_table(n) : epsilon_table(n));
  } else if (curve->parsed()) {
    const auto layouts = curve_layouts.empty() ? default_curve_layouts() : split_list(curve_layouts);
    if (show_crossovers) {
      Table t;
      t.columns = {"a", "b", "t"};
      for (const auto& c : curve_crossovers(layouts, n, t_max)) t.add({c.a, c.b, Cell::num(c.t, 6)});
      out.emit(t);
    } else {
      out.emit(reliability_curve(layouts, n, t_max, step));
    }
  } else if (runcmd->parsed()) {
    const Scenario s = Scenario::load(scenario_path);
    ScenarioOverrides o;
    if (runcmd->count("--seed")) o.seed = seed;
    if (runcmd->count("--trials")) o.trials = trials;
    if (runcmd->count("--n")) o.disks = n;
    if (!run_layout.empty()) o.layout = run_layout;
    if (!runcmd->count("--format")) out.format = std::string(scenario_format(s) == Format::csv ? "csv" : "json");
    out.emit(run_scenario(s, o));
  } else if (lexport->parsed()) {
    const Layout l = build_layout(parse_layout_spec(layout_name, n, layout_param));
    out.emit_text(to_json(l).dump(2) + "\n");
  } else if (limport->parsed()) {
    std::ifstream in(layout_file);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("layout", e.what());
    }
    const Layout l = layout_from_json(j);
    const SurvivorProfile p = survivor_profile(l);
    Table t;
    t.columns = {"i", "A(N,i)", "C(N,i)"};
    for (int i = 0; i <= l.disks(); ++i) {
      t.add({Cell::integer(i), Cell::integer(static_cast<long long>(p.count(i))),
             Cell::integer(static_cast<long long>(binomial(l.disks(), i)))});
    }
    out.emit(t);
  } else if (seek->parsed()) {
    std::ostringstream ini;
    ini << "[scenario]\ncommand=seek\nseed=" << seed << "\n[sim]\nkind=" << seek_kind << "\nk=" << seek_k
        << "\nsamples=" << samples << "\n";
    out.emit(run_scenario(Scenario::parse(ini.str())));
  } else if (mc->parsed()) {
    std::ostringstream ini;
    ini << "[scenario]\ncommand=mc\nseed=" << seed << "\n[layout]\nname=" << mc_layout << "\ndisks=" << n
        << "\n[repair]\nmttf=" << mttf << "\n";
    if (mttr > 0) {
      ini << "mttr=" << mttr << "\n";
    } else {
      ini << "dist=none\n";
    }
    ini << "[sim]\ntrials=" << mc_trials << "\n";
    out.emit(run_scenario(Scenario::parse(ini.str())));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mirrorlab::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const mirrorlab::ConstraintError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const mirrorlab::UnsupportedLayout& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const mirrorlab::InstabilityError& e) {
    std::cerr << "instability: " << e.what() << "\n";
    return 3;
  } catch (const mirrorlab::BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
