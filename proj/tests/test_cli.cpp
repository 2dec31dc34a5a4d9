#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <sys/wait.h>

#include "mirrorlab/mirrorlab.hpp"

using namespace mirrorlab;

namespace {

struct CliRun {
  int status = -1;
  std::string out;
};

CliRun run_cli(const std::string& args) {
  const std::string cmd = std::string(MIRRORLAB_CLI) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), got);
  const int raw = pclose(p);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string scenario(const std::string& name) { return std::string(MIRRORLAB_SCENARIOS) + "/" + name; }

std::string csv(const Table& t) {
  std::ostringstream os;
  write_csv(os, t);
  return os.str();
}

}  // namespace

TEST(Report, CsvQuotingRoundTrip) {
  Table t;
  t.columns = {"a", "b,c", "d"};
  t.add({"plain", "with \"quotes\"", "line\nbreak"});
  t.add({Cell::integer(3), Cell::num(0.1), Cell::sig(12345.678)});
  const std::string text = csv(t);
  EXPECT_EQ(text.find('\r'), std::string::npos);
  EXPECT_NE(text.find("\"b,c\""), std::string::npos);
  const Table back = read_csv(text);
  EXPECT_EQ(back.columns, t.columns);
  ASSERT_EQ(back.rows.size(), 2u);
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(back.rows[r][c].text, t.rows[r][c].text);
  }
  EXPECT_EQ(t.rows[1][2].text, "12346");
  EXPECT_THROW(t.add({"short"}), Error);
  EXPECT_THROW(t.column("nope"), Error);
}

TEST(Report, JsonKeepsTypes) {
  Table t;
  t.columns = {"name", "n", "x"};
  t.add({"raid5", Cell::integer(8), Cell::num(0.25)});
  const auto j = table_json(t);
  ASSERT_EQ(j.size(), 1u);
  EXPECT_TRUE(j[0]["n"].is_number_integer());
  EXPECT_EQ(j[0]["n"].get<int>(), 8);
  EXPECT_DOUBLE_EQ(j[0]["x"].get<double>(), 0.25);
  EXPECT_EQ(j[0].begin().key(), "name");
  EXPECT_THROW(parse_format("xml"), ValidationError);
}

TEST(Tables, MttdlTableFlagsPrintedRaid7AndLsi) {
  const Table t = mttdl_table(8);
  const auto layout = t.column("layout");
  const auto flag = t.column("discrepancy");
  const auto value = t.column("mttdl_delta");
  std::map<std::string, std::pair<std::string, std::string>> rows;
  for (const auto& row : t.rows) rows[row[layout].text] = {row[value].text, row[flag].text};
  EXPECT_EQ(rows["raid7"].first, "533/840");
  EXPECT_EQ(rows["raid7"].second, "paper:638/840");
  EXPECT_EQ(rows["lsi"].first, "82/105");
  EXPECT_EQ(rows["lsi"].second, "paper:521/840");
  EXPECT_EQ(rows["lsi_i3"].first, "521/840");
  EXPECT_EQ(rows["lsi_i3"].second, "");
  EXPECT_EQ(rows["raid5"].second, "");
  EXPECT_EQ(rows.size(), 13u);
}

TEST(Tables, CurveCsvProperties) {
  const Table t = read_csv(csv(reliability_curve(default_curve_layouts(), 8, 3, 0.01)));
  ASSERT_EQ(t.columns.front(), "t");
  const auto raid5 = t.column("raid5");
  for (std::size_t r = 1; r < t.rows.size(); ++r) {
    double lowest = 2;
    for (std::size_t c = 1; c < t.columns.size(); ++c) lowest = std::min(lowest, std::stod(t.rows[r][c].text));
    EXPECT_EQ(std::stod(t.rows[r][raid5].text), lowest) << "t=" << t.rows[r][0].text;
  }
  EXPECT_THROW(reliability_curve({"raid5"}, 8, 3, 0), ValidationError);
  EXPECT_THROW(reliability_curve({}, 8, 3, 0.1), ValidationError);
  EXPECT_THROW(reliability_curve({"bm"}, 7, 3, 0.1), ConstraintError);
}

TEST(Scenario, RejectsUnknownKeysWithPath) {
  try {
    Scenario::parse("[scenario]\ncommand=mttdl\n[layout]\ndiskz=8\n");
    FAIL() << "no error";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.path(), "layout.diskz");
  }
  EXPECT_THROW(Scenario::parse("[bogus]\nx=1\n"), ValidationError);
  EXPECT_THROW(Scenario::parse("[scenario\n"), ValidationError);
  const auto s = Scenario::parse("[scenario]\ncommand=mttdl\n[layout]\nname=bm\ndisks=x\n");
  EXPECT_THROW(run_scenario(s), ValidationError);
  EXPECT_THROW(run_scenario(Scenario::parse("[scenario]\ncommand=dance\n")), ValidationError);
  EXPECT_THROW(run_scenario(Scenario::parse("[scenario]\nseed=1\n")), ValidationError);
}

TEST(Scenario, ValueParsing) {
  const auto s = Scenario::parse("[sim]\ntrials=1e5\nstep=1/20\nrouting= jsq \n[scenario]\nformat=json\n");
  EXPECT_EQ(s.count("sim.trials"), 100000u);
  EXPECT_DOUBLE_EQ(*s.real("sim.step"), 0.05);
  EXPECT_EQ(*s.text("sim.routing"), "jsq");
  EXPECT_EQ(scenario_format(s), Format::json);
  EXPECT_FALSE(s.text("sim.kind").has_value());
  const auto bad = Scenario::parse("[sim]\ntrials=-3\nk=2.5\n");
  EXPECT_THROW(bad.count("sim.trials"), ValidationError);
  EXPECT_THROW(bad.int_value("sim.k"), ValidationError);
}

TEST(Scenario, BundledScenariosRun) {
  for (const auto& entry : std::filesystem::directory_iterator(MIRRORLAB_SCENARIOS)) {
    if (entry.path().extension() != ".ini") continue;
    const Scenario s = Scenario::load(entry.path().string());
    ScenarioOverrides o;
    o.trials = 20000;
    const Table t = run_scenario(s, o);
    EXPECT_FALSE(t.rows.empty()) << entry.path();
    if (std::find(t.columns.begin(), t.columns.end(), "check") == t.columns.end()) continue;
    const auto check = t.column("check");
    for (const auto& row : t.rows) EXPECT_NE(row[check].text, "outside") << entry.path();
  }
}

TEST(Scenario, OverridesApply) {
  const Scenario s = Scenario::load(scenario("mttdl_lsi.ini"));
  ScenarioOverrides o;
  o.layout = "raid6";
  const Table t = run_scenario(s, o);
  const auto metric = t.column("metric");
  const auto value = t.column("value");
  bool found = false;
  for (const auto& row : t.rows) {
    if (row[metric].text == "mttdl_delta") {
      EXPECT_EQ(row[value].text, "73/168");
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST(Cli, ByteIdenticalReruns) {
  for (const std::string& args :
       {"run " + scenario("mc_raid5.ini") + " --trials 5000", "run " + scenario("des_round_robin.ini") + " --trials 20000",
        std::string("seek --kind ns_circle --trials 20000 --seed 9"), std::string("table mttdl --format json")}) {
    const CliRun a = run_cli(args);
    const CliRun b = run_cli(args);
    EXPECT_EQ(a.status, 0) << args;
    EXPECT_FALSE(a.out.empty()) << args;
    EXPECT_EQ(a.out, b.out) << args;
  }
  EXPECT_NE(run_cli("seek --kind ns_circle --trials 20000 --seed 9").out,
            run_cli("seek --kind ns_circle --trials 20000 --seed 10").out);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("--version").status, 0);
  EXPECT_EQ(run_cli("mc --layout raid9000").status, 2);
  EXPECT_EQ(run_cli("curve --layout bm --n 7").status, 2);
  EXPECT_EQ(run_cli("run /nonexistent.ini").status, 2);
  EXPECT_EQ(run_cli("table bogus").status, 2);
  EXPECT_EQ(run_cli("").status, 2);
}

TEST(Cli, LayoutExportImport) {
  const auto tmp = std::filesystem::temp_directory_path() / "mirrorlab_lsi.json";
  EXPECT_EQ(run_cli("layout export --layout lsi --n 8 --out " + tmp.string()).status, 0);
  const CliRun r = run_cli("layout import " + tmp.string());
  EXPECT_EQ(r.status, 0);
  const Table t = read_csv(r.out);
  EXPECT_EQ(t.rows[3][1].text, "52");
  std::filesystem::remove(tmp);
}
