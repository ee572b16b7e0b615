#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fracmem/run.hpp"

using namespace fracmem;
namespace fs = std::filesystem;

namespace {

io::Json parse(const std::string& text) { return io::Json::parse(text); }

}  // namespace

TEST_CASE("command names") {
  for (auto c : {Command::solve, Command::optimize, Command::alpha_bar, Command::convert_pn, Command::experiment_ball,
                 Command::experiment_annulus, Command::validate_operator})
    CHECK(command_from_string(to_string(c)) == c);
  CHECK(to_string(Command::alpha_bar) == "alpha-bar");
  CHECK_THROWS_AS(command_from_string("plot"), ValidationError);
}

TEST_CASE("configuration defaults and validation") {
  const auto c = parse_config(parse("{}"), Command::optimize);
  CHECK(c.s == 0.5);
  CHECK(c.resolution == 64);
  CHECK(parse_config(parse("{}"), Command::experiment_annulus).s == 0.25);

  auto message = [](const std::string& text, Command cmd) {
    try {
      parse_config(parse(text), cmd);
    } catch (const ValidationError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(R"({"sx": 1})", Command::optimize).find("sx") != std::string::npos);
  CHECK(message(R"({"s": -1})", Command::optimize).find("s") != std::string::npos);
  CHECK(message(R"({"domain": {"shape": "disk", "radius": 1, "lo": 0}})", Command::optimize).find("lo") !=
        std::string::npos);
  CHECK(message(R"({"area_fraction": 1.5})", Command::optimize).find("area_fraction") != std::string::npos);
  CHECK(message(R"({"resolution": "big"})", Command::optimize).find("resolution") != std::string::npos);
  CHECK(message(R"({"command": "solve"})", Command::optimize).find("command") != std::string::npos);
  CHECK(message(R"({"tolerances": {"eigen": 1}})", Command::optimize).find("eigen") != std::string::npos);
  CHECK_FALSE(message(R"({"domain": {"shape": "interval"}})", Command::experiment_ball).empty());
}

TEST_CASE("optimize run matches the library call bit for bit") {
  const auto cfg = parse_config(
      parse(R"({"domain": {"shape": "interval", "lo": -1, "hi": 1}, "s": 0.25, "alpha": 2, "area_fraction": 0.3,
                "resolution": 48})"),
      Command::optimize);
  const auto out = execute(cfg);
  const auto d = build_domain(ShapeSpec::interval(-1.0, 1.0), 48);
  const auto op = assemble(d, 0.25);
  MultiStartOptions ms;
  ms.optimize = cfg.optimize_options();
  const auto pair = optimize_multistart(op, 2.0, 0.3 * d.measure(), ms);
  const auto back = io::Json::parse(io::dump_json(out.result));
  CHECK(back["lambda"].get<double>() == pair.lambda);
  CHECK(back["threshold"].get<double>() == pair.threshold);
  CHECK(out.files.count("fields.csv") == 1);
  CHECK(out.files.count("u.svg") == 1);
  CHECK(out.files.count("D.svg") == 1);
}

TEST_CASE("solve with a given configuration") {
  const auto cfg = parse_config(
      parse(R"({"domain": {"shape": "interval", "lo": -1, "hi": 1}, "resolution": 10, "alpha": 3,
                "configuration": [2, 6, 2]})"),
      Command::solve);
  const auto out = execute(cfg);
  const auto op = assemble(build_domain(ShapeSpec::interval(-1.0, 1.0), 10), 0.5);
  Configuration d{run_length_decode({2, 6, 2}), 0.0};
  CHECK(out.result["lambda"].get<double>() == smallest_eigenpair(op, potential_of(d, 3.0), cfg.eigen_options()).lambda);
  CHECK_THROWS_AS(execute(parse_config(parse(R"({"resolution": 10, "configuration": [2, 6]})"), Command::solve)),
                  ValidationError);
}

TEST_CASE("density conversion run") {
  const auto cfg = parse_config(
      parse(R"({"physical": {"density_floor": 0, "density_ceiling": 1, "mass": 0.5, "theta": 3},
                "domain": {"shape": "interval", "lo": 0, "hi": 1}, "resolution": 8})"),
      Command::convert_pn);
  const auto out = execute(cfg);
  CHECK(out.result["alpha"].get<double>() == doctest::Approx(3.0));
  CHECK(out.result["area"].get<double>() == doctest::Approx(0.5));
  CHECK(out.result["lambda"].get<double>() == doctest::Approx(3.0));
}

TEST_CASE("run_command exit codes and artifacts") {
  const auto dir = fs::temp_directory_path() / "fracmem_run_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return dir / name;
  };
  std::ostringstream err;
  const auto good = write("good.json", R"({"domain": {"shape": "interval", "lo": -1, "hi": 1}, "resolution": 32})");
  CHECK(run_command("optimize", good, dir / "a", std::nullopt, err) == kExitOk);
  for (const char* f : {"result.json", "fields.csv", "u.svg", "D.svg"}) CHECK(fs::exists(dir / "a" / f));

  const auto bad = write("bad.json", R"({"s": -1})");
  CHECK(run_command("optimize", bad, dir / "b", std::nullopt, err) == kExitValidation);
  CHECK_FALSE(fs::exists(dir / "b"));
  CHECK(err.str().find("s") != std::string::npos);

  const auto broken = write("broken.json", "{ not json");
  CHECK(run_command("optimize", broken, dir / "c", std::nullopt, err) == kExitValidation);
  CHECK(run_command("optimize", dir / "absent.json", dir / "c", std::nullopt, err) == kExitValidation);
  CHECK(run_command("frobnicate", good, dir / "c", std::nullopt, err) == kExitValidation);

  const auto hard = write("hard.json", R"({"domain": {"shape": "interval", "lo": -1, "hi": 1}, "resolution": 64,
                                           "tolerances": {"eigen_residual": 1e-300}})");
  CHECK(run_command("solve", hard, dir / "d", std::nullopt, err) == kExitSolver);
  fs::remove_all(dir);
}
