#include <gtest/gtest.h>

#include <cstdlib>
#include <map>
#include <filesystem>

#include "opph/commands.hpp"
#include "opph/speed_metrics.hpp"

using namespace opph;
namespace fs = std::filesystem;

namespace {

SceneSpec scene(const std::string& id, std::vector<MotionSegment> motion, std::vector<NoiseSpec> noise = {}) {
  SceneSpec s;
  s.id = id;
  s.width = 200;
  s.height = 120;
  s.fps = 10;
  s.body_width = 20;
  s.body_height = 24;
  s.start_x = 20;
  s.start_y = 20;
  s.motion = std::move(motion);
  s.noise = std::move(noise);
  return s;
}

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / ("opph_cmd_" + std::to_string(::getpid()) + "_" +
                                       ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }
};

int cli(const std::string& args) {
  const std::string cmd = std::string(OPPH_CLI_PATH) + " " + args + " 2>/dev/null";
  return std::system(cmd.c_str());
}

}  // namespace

TEST(SpeedSourceText, RoundTrip) {
  for (auto s : {SpeedSource::flo, SpeedSource::pose, SpeedSource::builtin_flow}) {
    EXPECT_EQ(parse_speed_source(to_string(s)), s);
  }
  EXPECT_THROW(parse_speed_source("raft"), InvalidArgument);
}

TEST(MeasureVideo, StaticNoisySceneGatesToZero) {
  const auto v = open_scene(scene("still", {{30, 0, 0}}, {NoiseSpec::gaussian(2)}));
  PipelineOptions opt;
  opt.source = SpeedSource::builtin_flow;
  const RunOutput out = run_video(*v, opt, false);
  ASSERT_TRUE(out.gate);
  double raw_sum = 0;
  for (const auto& row : out.speeds.rows()) {
    EXPECT_EQ(row[2], "0");
    raw_sum += std::stod(row[1]);
  }
  EXPECT_GT(raw_sum, 0.0);
  const RunOutput no = run_video(*v, opt, true);
  EXPECT_FALSE(no.gate);
  EXPECT_EQ(no.speeds.columns(), (std::vector<std::string>{"frame", "raw_speed"}));
}

TEST(MeasureVideo, JobsDoNotChangeResults) {
  const auto v = open_scene(scene("move", {{10, 2, 0}, {10, 0, 0}, {10, -1, 1}}, {NoiseSpec::gaussian(3)}));
  PipelineOptions opt;
  opt.source = SpeedSource::builtin_flow;
  const std::vector<FilterSpec> filters{FilterSpec::median(), FilterSpec::tv(0.1, 10)};
  const VideoSpeeds a = measure_video(*v, opt, filters);
  opt.jobs = 4;
  const VideoSpeeds b = measure_video(*v, opt, filters);
  EXPECT_EQ(a.raw, b.raw);
  EXPECT_EQ(a.indicator, b.indicator);
  EXPECT_EQ(a.filtered, b.filtered);
}

TEST(MeasureVideo, SourceErrors) {
  const auto v = open_scene(scene("s", {{3, 0, 0}}));
  PipelineOptions opt;
  opt.source = SpeedSource::pose;
  EXPECT_THROW(measure_video(*v, opt), InvalidArgument);
  opt.source = SpeedSource::flo;
  EXPECT_THROW(measure_video(*v, opt, {FilterSpec::kalman()}), InvalidArgument);
}

TEST(Eval, GroundTruthInputGivesZeroRawError) {
  const auto a = open_scene(scene("a", {{20, 1, 0}}));
  const auto b = open_scene(scene("b", {{20, 0, 1}}));
  PipelineOptions opt;
  const auto series = collect_variants({a.get(), b.get()}, default_variants({}), opt);
  const CsvTable rep = eval_report(series, opt);
  ASSERT_EQ(rep.rows().size(), 8u);
  EXPECT_EQ(rep.rows()[0], (std::vector<std::string>{"video", "raw", "a", "0"}));
  EXPECT_EQ(rep.rows()[2], (std::vector<std::string>{"mean", "raw", "*", "0"}));
  EXPECT_EQ(rep.rows()[3], (std::vector<std::string>{"median", "raw", "*", "0"}));
}

TEST(Eval, SingleVideoMeanEqualsMedian) {
  const auto a = open_scene(scene("a", {{30, 0, 0}}, {NoiseSpec::gaussian(2)}));
  PipelineOptions opt;
  opt.source = SpeedSource::builtin_flow;
  const auto series = collect_variants({a.get()}, {Variant::parse("raw")}, opt);
  const CsvTable rep = eval_report(series, opt);
  EXPECT_EQ(rep.rows()[0][3], rep.rows()[1][3]);
  EXPECT_EQ(rep.rows()[0][3], rep.rows()[2][3]);
}

TEST(Eval, Errors) {
  const auto a = open_scene(scene("a", {{5, 0, 0}}));
  PipelineOptions opt;
  EXPECT_THROW(collect_variants({a.get(), a.get()}, default_variants({}), opt), InvalidArgument);
  EXPECT_THROW(collect_variants({a.get()}, default_variants({}), opt, {SpeedSeries({0, 0}, 10)}),
               InvalidArgument);
  EXPECT_THROW(Variant::parse("sharpen"), InvalidArgument);
}

TEST(Correlate, SelfCorrelationAndWindowCheck) {
  const auto a = open_scene(scene("z", {{20, 1, 0}, {20, 3, 0}, {20, 0, 0}}));
  const auto b = open_scene(scene("y", {{20, 2, 0}, {20, 0, 1}}));
  PipelineOptions opt;
  const auto series = collect_variants({a.get(), b.get()}, {Variant::parse("raw")}, opt);
  const CorrelateOutput rep = correlate_report(series, {1.0, 2.0}, opt);
  ASSERT_EQ(rep.summary.rows().size(), 2u);
  EXPECT_EQ(rep.summary.rows()[0][4], "1");
  // y is stacked before z.
  EXPECT_EQ(rep.windows.rows()[0][3], "20");
  EXPECT_THROW(correlate_report(series, {60.0}, opt), InvalidArgument);
}

TEST(Bench, ReportsEveryStage) {
  const BenchResult small = bench_opph(320, 240, 20, 2);
  const BenchResult big = bench_opph(640, 480, 20, 2);
  ASSERT_EQ(small.stage_ms.size(), 5u);
  const CsvTable t = bench_report(small);
  ASSERT_EQ(t.rows().size(), 6u);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(t.rows()[k][0], kBenchStages[k]);
  EXPECT_EQ(t.rows()[5][0], "total");
  EXPECT_LT(small.total_ms, big.total_ms);
  EXPECT_EQ(big.config.n(), 5);
}

TEST(Cli, EndToEndIsDeterministic) {
  Workspace ws;
  const fs::path scene_file = ws.dir / "scene.txt";
  write_text(scene_file, format_scene(scene("cli", {{15, 0, 0}, {15, 2, 0}}, {NoiseSpec::gaussian(2)})));
  ASSERT_EQ(cli("synth --scene " + scene_file.string() + " --out " + (ws.dir / "seq").string()), 0);
  const std::string m = (ws.dir / "seq" / "manifest.json").string();
  for (const char* d : {"r1", "r2", "r4"}) {
    const std::string jobs = std::string(d) == "r4" ? " --jobs 4" : "";
    ASSERT_EQ(cli("run --manifest " + m + " --source builtin-flow --out " + (ws.dir / d).string() + jobs), 0);
  }
  for (const char* f : {"speeds.csv", "gate.csv"}) {
    EXPECT_EQ(read_text(ws.dir / "r1" / f), read_text(ws.dir / "r2" / f));
    EXPECT_EQ(read_text(ws.dir / "r1" / f), read_text(ws.dir / "r4" / f));
  }
  const CsvTable speeds = CsvTable::read(ws.dir / "r1" / "speeds.csv");
  EXPECT_EQ(speeds.rows().size(), 30u);
  EXPECT_EQ(speeds.rows()[0][2], "0");

  ASSERT_EQ(cli("run --manifest " + m + " --no-opph --theta 30 --out " + (ws.dir / "raw").string()), 0);
  EXPECT_FALSE(fs::exists(ws.dir / "raw" / "gate.csv"));
  const CsvTable raw = CsvTable::read(ws.dir / "raw" / "speeds.csv");
  bool saw_theta = false;
  for (const auto& [k, v] : raw.meta()) saw_theta |= k == "theta" && v == "30";
  EXPECT_TRUE(saw_theta);

  ASSERT_EQ(cli("compare-filters --manifest " + m + " --out " + (ws.dir / "e1.csv").string()), 0);
  ASSERT_EQ(cli("compare-filters --manifest " + m + " --jobs 4 --out " + (ws.dir / "e4.csv").string()), 0);
  EXPECT_EQ(read_text(ws.dir / "e1.csv"), read_text(ws.dir / "e4.csv"));
  EXPECT_EQ(CsvTable::read(ws.dir / "e1.csv").rows().size(), 6u * 3u);
}

TEST(Cli, ErrorsExitNonZero) {
  Workspace ws;
  EXPECT_NE(cli("run --manifest " + (ws.dir / "none.json").string() + " --out x"), 0);
  write_text(ws.dir / "bad.json", "{\"id\":\"b\",\"fps\":30,\"frames\":[\"a.ppm\",\"b.ppm\"],\"masks\":[\"a.pgm\",\"b.pgm\"]}");
  EXPECT_NE(cli("run --manifest " + (ws.dir / "bad.json").string() + " --source builtin-flow --out " +
                (ws.dir / "o").string()),
            0);
  EXPECT_NE(cli("bench --width 0"), 0);
  EXPECT_NE(cli("frobnicate"), 0);
}

TEST(Cli, ConfigFilePrecedence) {
  Workspace ws;
  write_text(ws.dir / "scene.txt", format_scene(scene("cfg", {{12, 0, 0}})));
  ASSERT_EQ(cli("synth --scene " + (ws.dir / "scene.txt").string() + " --out " + (ws.dir / "seq").string()), 0);
  write_text(ws.dir / "opph.conf", "theta = 40\nm = 3\n");
  const std::string m = (ws.dir / "seq" / "manifest.json").string();
  ASSERT_EQ(cli("run --manifest " + m + " --config " + (ws.dir / "opph.conf").string() + " --m 7 --out " +
                (ws.dir / "o").string()),
            0);
  std::map<std::string, std::string> meta;
  const CsvTable gate = CsvTable::read(ws.dir / "o" / "gate.csv");
  for (const auto& [k, v] : gate.meta()) meta[k] = v;
  EXPECT_EQ(meta["theta"], "40");
  EXPECT_EQ(meta["m"], "7");
  EXPECT_EQ(meta["n"], "3");
}
