#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "walign/errors.hpp"
#include "walign/io.hpp"

using namespace walign;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("walign_io_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content) const {
    const auto p = (path / name).string();
    std::ofstream(p) << content;
    return p;
  }
};

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("csv measures") {
  TempDir dir;
  const auto plain = read_measure_csv(dir.file("a.csv", "0,0\n1,2\n\n3,4\n"));
  CHECK(plain.size() == 3);
  CHECK(plain.dim() == 2);
  CHECK(plain.weights()[1] == doctest::Approx(1.0 / 3));

  const auto weighted = read_measure_csv(dir.file("b.csv", "x,y,weight\n0,0,0.25\n1,1,0.75\n"));
  CHECK(weighted.dim() == 2);
  CHECK(weighted.weights()[1] == 0.75);

  const auto header_only_coords = read_measure_csv(dir.file("c.csv", "x,y\n1.5,-2e-3\n"));
  CHECK(header_only_coords.points()(1, 0) == -2e-3);

  CHECK_THROWS_AS(read_measure_csv(dir.file("d.csv", "1,2\n3\n")), InputError);
  CHECK_THROWS_AS(read_measure_csv(dir.file("e.csv", "1,2\n3,abc\n")), InputError);
  CHECK_THROWS_AS(read_measure_csv(dir.file("f.csv", "x,weight\n0,0.5\n1,0.3\n")), InputError);
  try {
    read_measure_csv((dir.path / "missing.csv").string());
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("missing.csv") != std::string::npos);
  }
}

TEST_CASE("cost and family strings") {
  CHECK(parse_cost_spec("sq-euclidean").kind() == CostSpec::Kind::SquaredEuclidean);
  CHECK(parse_cost_spec("power:1.5").parameter() == 1.5);
  CHECK(parse_cost_spec("inner:-8").kind() == CostSpec::Kind::InnerProduct);
  CHECK_THROWS_AS(parse_cost_spec("power:0.2"), InputError);
  CHECK_THROWS_AS(parse_cost_spec("cosine"), InputError);

  CHECK(parse_family_spec("rotations2d:8", 2, 2).size() == 8);
  CHECK_THROWS_AS(parse_family_spec("rotations2d:0", 2, 2), InputError);
  CHECK_THROWS_AS(parse_family_spec("rotations2d:8", 3, 2), InputError);
  CHECK_THROWS_AS(parse_family_spec("spirals:3", 2, 2), InputError);

  TempDir dir;
  const auto mats = parse_family_spec("matrices:" + dir.file("m.csv", "1,0,0,0,1,0,0.5\n0,1,0,0,0,1,0\n"), 3, 2);
  REQUIRE(mats.size() == 2);
  CHECK(mats[0].matrix.rows() == 2);
  CHECK(mats[0].matrix.cols() == 3);
  CHECK(mats[0].matrix(1, 1) == 1.0);
  CHECK(mats[0].penalty == 0.5);
  CHECK(mats[1].matrix(0, 1) == 1.0);
  CHECK(mats[1].penalty == 0.0);

  const auto igw = parse_family_spec("igw:" + dir.file("g.csv", "1,0,0,1,0,0\n"), 3, 2);
  CHECK(igw[0].matrix.rows() == 2);
  CHECK(igw[0].penalty == 16.0);
  CHECK_THROWS_AS(parse_family_spec("matrices:" + dir.file("bad.csv", "1,2,3\n"), 3, 2), InputError);

  const auto pen = read_penalties(dir.file("p.txt", "0.1\n0.2\n0.3\n"));
  CHECK(pen == std::vector<double>{0.1, 0.2, 0.3});
  CHECK(read_penalties(dir.file("q.txt", "1,2\n")) == std::vector<double>{1, 2});
}

TEST_CASE("json numbers round-trip") {
  nlohmann::json j;
  j["third"] = 1.0 / 3.0;
  j["nan"] = std::nan("");
  j["list"] = {0.1, 2.5e-300, -7.0};
  j["label"] = "rot1:0.785398";
  const std::string text = dump_json(j);
  const auto back = nlohmann::json::parse(text);
  CHECK(back["third"].get<double>() == 1.0 / 3.0);
  CHECK(back["nan"].is_null());
  CHECK(back["list"][1].get<double>() == 2.5e-300);
  CHECK(back["label"] == "rot1:0.785398");
  CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("report, csv and svg writers") {
  std::mt19937_64 rng(81);
  std::normal_distribution<double> g;
  Matrix x(2, 7);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  const auto mu = DiscreteMeasure::uniform(x);
  const auto fam = rotation_grid(6);
  const auto nu = pushforward(mu, fam[2]);
  const auto ct = build_cost_tensor(mu, nu, fam, CostSpec::squared_euclidean());
  const auto rep = align(mu, nu, fam, ct);

  const auto j = report_json(rep, fam);
  for (const char* key : {"value", "thetaStar", "iCurve", "gapCurve", "psi", "planNnz", "timingsMs"}) CHECK(j.contains(key));
  CHECK(j["thetaStar"]["index"] == 2);
  CHECK(j["thetaStar"]["label"] == fam[2].label);
  CHECK(j["iCurve"].size() == 6u);
  CHECK(j["psi"].size() == 7u);
  CHECK(j["planNnz"].get<int>() >= 7);

  const auto curve = curve_csv(rep, fam);
  CHECK(curve.rfind("k,label,angle,I,objective,delta,g\n", 0) == 0);
  CHECK(count(curve, "\n") == 7u);

  const auto plan = plan_csv(rep.plan);
  CHECK(count(plan, "\n") == 7u);
  const auto pot = potentials_csv(rep.potentials);
  CHECK(pot.rfind("side,index,value\n", 0) == 0);
  CHECK(count(pot, "\n") == 15u);

  const std::string svg = svg_scatter(nu, pushforward(mu, fam[rep.theta_star]));
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(count(svg, "<circle") == 14u);
  CHECK(count(svg, "<svg") == 1u);
  CHECK(count(svg, "</svg>") == 1u);
  CHECK(svg.find("viewBox=\"0 0 800 800\"") != std::string::npos);

  const auto line = svg_scatter(DiscreteMeasure::uniform(Matrix::Ones(1, 3)), DiscreteMeasure::uniform(Matrix::Zero(1, 2)));
  CHECK(count(line, "<circle") == 5u);
}
