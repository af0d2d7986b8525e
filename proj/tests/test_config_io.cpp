#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stabprobe/config.hpp"
#include "stabprobe/io.hpp"
#include "stabprobe/svg.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace stabprobe;

namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const fs::path dir = fs::temp_directory_path() / "stabprobe_config_tests";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream out(p);
  out << content;
  return p.string();
}

GridResult synthetic_sweep() {
  GridResult g;
  g.col_values = {1.0, 2.0};
  GridCell a;
  a.probe_mean = 0.5;
  a.probe_std = 0.125;
  a.trials = 4;
  GridCell b = a;
  b.probe_mean = 0.75;
  g.cells = {a, b};
  return g;
}

GridResult synthetic_grid() {
  GridResult g;
  g.row_values = {0.8, 2.0};
  g.col_values = {1.0, 2.0, 3.0};
  for (double m : {0.1, 0.4, 0.6, 0.02, 0.03, 0.04}) {
    GridCell c;
    c.probe_mean = m;
    c.probe_std = 0.01;
    c.trials = 2;
    g.cells.push_back(c);
  }
  g.frontier = {std::optional<int>(3), std::nullopt};
  g.iso_band = {false, true, false, false, false, false};
  return g;
}

}  // namespace

TEST_CASE("defaults match the experiment tables") {
  const CliConfig cfg = parse_config(std::nullopt, {}, false);
  CHECK(cfg.exp.n == 3);
  CHECK(cfg.exp.samples == 100000);
  CHECK(cfg.exp.trials == 50);
  CHECK(cfg.exp.p_grid == std::vector<double>{0.8, 1.0, 1.5, 2.0, 3.0});
  CHECK(cfg.exp.lag_grid == std::vector<int>{1, 2, 3, 4, 5, 6, 7});
  CHECK(cfg.exp.k_grid == std::vector<int>{1, 2, 3, 4, 5, 6});
  CHECK(cfg.exp.ar == std::vector<double>{0.2, 0.6, 0.9});
  CHECK(cfg.exp.epsilon == 0.5);
  CHECK(cfg.exp.delta == 0.05);
  CHECK(cfg.exp.symmetrize);
  CHECK(!cfg.exp.report_api);
  CHECK(cfg.format == "csv");

  const std::string empty = write_temp("empty.cfg", "# nothing here\n\n");
  const CliConfig from_file = parse_config(empty, {}, false);
  CHECK(from_file.exp.samples == 100000);
}

TEST_CASE("flags override file values") {
  const std::string file = write_temp("quick.cfg", "T = 20000\nout_dir = /tmp/x\n");
  const CliConfig cfg = parse_config(file, {{"trials", "20"}});
  CHECK(cfg.exp.samples == 20000);
  CHECK(cfg.exp.trials == 20);
  CHECK(cfg.out_dir == "/tmp/x");

  const CliConfig flipped = parse_config(file, {{"T", "555"}});
  CHECK(flipped.exp.samples == 555);
}

TEST_CASE("quick preset scales T and trials unless set explicitly") {
  const CliConfig quick = parse_config(std::nullopt, {{"preset", "quick"}}, false);
  CHECK(quick.exp.samples == 20000);
  CHECK(quick.exp.trials == 20);

  const std::string file = write_temp("quick2.cfg", "preset = quick\nT = 7777\n");
  const CliConfig mixed = parse_config(file, {}, false);
  CHECK(mixed.exp.samples == 7777);  // explicit key beats the preset scale
  CHECK(mixed.exp.trials == 20);
}

TEST_CASE("config errors name the offender") {
  const std::string bogus = write_temp("bogus.cfg", "bogus = 1\n");
  CHECK_THROWS_WITH_AS(parse_config(bogus, {}, false), doctest::Contains("bogus"), ConfigError);

  const std::string bad_value = write_temp("bad.cfg", "trials = soon\n");
  CHECK_THROWS_WITH_AS(parse_config(bad_value, {}, false), doctest::Contains("trials"),
                       ConfigError);

  const std::string no_eq = write_temp("noeq.cfg", "just words\n");
  CHECK_THROWS_AS(parse_config(no_eq, {}, false), ConfigError);

  CHECK_THROWS_WITH_AS(parse_config(std::nullopt, {}), doctest::Contains("out_dir"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(std::nullopt, {{"nope", "1"}}, false),
                       doctest::Contains("nope"), ConfigError);
}

TEST_CASE("resolved config round-trips through the parser") {
  const CliConfig cfg = parse_config(std::nullopt,
                                     {{"T", "12345"},
                                      {"p_grid", "0.9,1.1"},
                                      {"mode", "population"},
                                      {"out_dir", "/tmp/rt"}});
  const std::string text = resolved_text(cfg);
  const std::string file = write_temp("resolved.cfg", text);
  const CliConfig again = parse_config(file, {});
  CHECK(resolved_text(again) == text);
}

TEST_CASE("format_double survives a round trip") {
  for (double v : {0.1, 1.0 / 3.0, 0.42426406871192851, 1e-17, 123456.789}) {
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
}

TEST_CASE("sweep csv schema with and without api") {
  GridResult g = synthetic_sweep();
  const std::string no_api = sweep_csv(g, 1000, false);
  CHECK(no_api.find("param,probe_mean,probe_std,api_mean,api_std,trials,T\n") == 0);
  CHECK(no_api.find(",0.5,0.125,,,4,1000\n") != std::string::npos);

  g.cells[0].api_mean = 0.25;
  g.cells[0].api_std = 0.0625;
  g.cells[1].api_mean = 0.5;
  g.cells[1].api_std = 0.0;
  const std::string with_api = sweep_csv(g, 1000, true);
  CHECK(with_api.find("1,0.5,0.125,0.25,0.0625,4,1000\n") != std::string::npos);
  CHECK(with_api.find("2,0.75,0.125,0.5,0,4,1000\n") != std::string::npos);
}

TEST_CASE("tradeoff, frontier, iso-band and records csv schemas") {
  const GridResult g = synthetic_grid();
  const std::string t = tradeoff_csv(g, "L");
  CHECK(t.find("p,L,probe_mean,probe_std\n") == 0);
  CHECK(t.find("0.80000000000000004,1,0.1,0.01\n") != std::string::npos);
  CHECK(t.find("2,3,0.04,0.01\n") != std::string::npos);

  const std::string f = frontier_csv(g);
  CHECK(f == "p,frontier\n0.80000000000000004,3\n2,\n");

  const std::string iso = isoband_csv(g, "L");
  CHECK(iso.find("p,L,in_band\n") == 0);
  CHECK(iso.find("0.80000000000000004,2,1\n") != std::string::npos);
  CHECK(iso.find("0.80000000000000004,1,0\n") != std::string::npos);

  GridResult with_records = g;
  TrialRecord rec;
  rec.param = "0.8:1";
  rec.trial = 0;
  rec.probe = 0.125;
  rec.ms = 1.5;
  with_records.records = {rec};
  const std::string r = records_csv(with_records);
  CHECK(r.find("param,trial,probe,api,ms\n") == 0);
  CHECK(r.find("0.8:1,0,0.125,,1.5\n") != std::string::npos);
}

TEST_CASE("signal csv carries the channel header") {
  SignalBlock block;
  block.samples = Mat::Zero(2, 3);
  block.samples(1, 2) = 0.5;
  const std::string csv = signal_csv(block);
  CHECK(csv.find("t,ch1,ch2,ch3\n") == 0);
  CHECK(csv.find("1,0,0,0.5\n") != std::string::npos);
}

TEST_CASE("report serialization is flat key-value text") {
  JacobianReport rep;
  rep.rows = 9;
  rep.cols = 3;
  rep.singular_values = {1.0, 0.5, 0.125};
  rep.probe = 0.125;
  rep.kernel_dim = 0;
  rep.tol = 1e-8;
  const std::string text = serialize_report(rep);
  CHECK(text.find("rows=9\n") != std::string::npos);
  CHECK(text.find("cols=3\n") != std::string::npos);
  CHECK(text.find("probe=0.125\n") != std::string::npos);
  CHECK(text.find("kernel_dim=0\n") != std::string::npos);
  CHECK(text.find("sv=1,0.5,0.125\n") != std::string::npos);
}

TEST_CASE("svg emitters are structural and deterministic") {
  GridResult sweep = synthetic_sweep();
  sweep.cells[0].api_mean = 0.3;
  sweep.cells[0].api_std = 0.1;
  sweep.cells[1].api_mean = 0.2;
  sweep.cells[1].api_std = 0.1;
  const std::string line_plot = sweep_svg(sweep, "title", "L");
  CHECK(line_plot.rfind("<svg", 0) == 0);
  CHECK(line_plot.find("</svg>") != std::string::npos);
  CHECK(line_plot.find("<polyline") != std::string::npos);
  CHECK(line_plot.find("API") != std::string::npos);
  CHECK(sweep_svg(sweep, "title", "L") == line_plot);

  const GridResult grid = synthetic_grid();
  const std::string heat = heatmap_svg(grid, "title", "L");
  CHECK(heat.rfind("<svg", 0) == 0);
  CHECK(heat.find("url(#hatch)") != std::string::npos);  // iso band overlay
  CHECK(heat.find("<circle") != std::string::npos);      // frontier marker
  CHECK(heatmap_svg(grid, "title", "L") == heat);
}

TEST_CASE("write_resolved drops config.resolved into out_dir") {
  const fs::path dir = fs::temp_directory_path() / "stabprobe_config_tests" / "resolved_out";
  fs::remove_all(dir);
  CliConfig cfg = parse_config(std::nullopt, {{"out_dir", dir.string()}});
  write_resolved(cfg);
  CHECK(fs::exists(dir / "config.resolved"));
  std::ifstream in(dir / "config.resolved");
  std::string first;
  std::getline(in, first);
  CHECK(first == "n = 3");
}
