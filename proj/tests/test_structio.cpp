#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>

#include <json.hpp>

#include "atombench/atomic_file.hpp"
#include "atombench/error.hpp"
#include "atombench/structio.hpp"
#include "support/random_cells.hpp"

using namespace atombench;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
namespace fs = std::filesystem;

namespace {

constexpr const char* kNb3SnBlock =
    "5.32 5.32 5.32\n"
    "            90 90 90\n"
    "            Sn 0.000 0.000 0.000\n"
    "            Nb 0.000 0.500 0.500\n"
    "            Nb 0.500 0.000 0.500\n"
    "            Nb 0.500 0.500 0.000\n";

constexpr const char* kNb3SnPoscar =
    "Nb3Sn\n"
    "1.0\n"
    "5.32 0 0\n"
    "0 5.32 0\n"
    "0 0 5.32\n"
    "Sn Nb\n"
    "1 3\n"
    "Direct\n"
    "0 0 0\n"
    "0 0.5 0.5\n"
    "0.5 0 0.5\n"
    "0.5 0.5 0\n";

// Coordinates equal modulo 1 within tol.
bool same_frac(const Vec3& u, const Vec3& v, double tol) {
  for (int k = 0; k < 3; ++k) {
    const double d = u[k] - v[k];
    if (std::abs(d - std::round(d)) > tol) return false;
  }
  return true;
}

void check_same_crystal(const Crystal& x, const Crystal& y, double tol) {
  REQUIRE(x.size() == y.size());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK_THAT(x.lattice().rows()[i][j], WithinAbs(y.lattice().rows()[i][j], tol));
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(x.species()[i] == y.species()[i]);
    CHECK(same_frac(x.frac_coords()[i], y.frac_coords()[i], tol));
  }
}

}  // namespace

TEST_CASE("minimal cubic POSCAR", "[structio]") {
  const auto c = parse_poscar("H\n1.0\n2 0 0\n0 2 0\n0 0 2\nH\n1\nDirect\n0 0 0\n");
  CHECK(c.size() == 1);
  CHECK(c.species()[0] == "H");
  CHECK(c.lattice().rows()[2][2] == 2);
}

TEST_CASE("Nb3Sn POSCAR", "[structio]") {
  const auto c = parse_poscar(kNb3SnPoscar);
  CHECK(c.size() == 4);
  CHECK(reduced_formula(c.species()) == "Nb3Sn");
  CHECK(c.species() == std::vector<std::string>{"Sn", "Nb", "Nb", "Nb"});
  CHECK(c.frac_coords()[2] == Vec3{0.5, 0, 0.5});
  check_same_crystal(parse_poscar(write_poscar(c)), c, 1e-6);
}

TEST_CASE("POSCAR scale factors", "[structio]") {
  const auto scaled = parse_poscar("x\n2.0\n1 0 0\n0 1 0\n0 0 1\nH\n1\nDirect\n0 0 0\n");
  CHECK(cell_volume(scaled.lattice()) == Catch::Approx(8));
  const auto by_volume = parse_poscar("x\n-27\n1 0 0\n0 1 0\n0 0 1\nH\n1\nDirect\n0 0 0\n");
  CHECK_THAT(cell_volume(by_volume.lattice()), WithinRel(27.0, 1e-12));
}

TEST_CASE("POSCAR variants", "[structio]") {
  SECTION("selective dynamics and POTCAR-style labels") {
    const auto c = parse_poscar(
        "x\n1\n3 0 0\n0 3 0\n0 0 3\nNb_pv Sn_d/abc\n1 1\nSelective dynamics\nDirect\n"
        "0 0 0 T T F\n0.5 0.5 0.5 F F F\n");
    CHECK(c.species() == std::vector<std::string>{"Nb", "Sn"});
  }
  SECTION("coordinates are wrapped") {
    const auto c = parse_poscar("x\n1\n3 0 0\n0 3 0\n0 0 3\nH\n1\nDirect\n-0.25 1.5 2.0\n");
    CHECK(c.frac_coords()[0] == Vec3{0.75, 0.5, 0.0});
  }
}

TEST_CASE("POSCAR errors", "[structio]") {
  CHECK_THROWS_AS(parse_poscar("x\n1\n3 0 0\n0 3 0\n0 0 3\nH\n1\nCartesian\n0 0 0\n"), UnsupportedFormat);
  CHECK_THROWS_AS(parse_poscar("x\n1\n3 0 0\n0 3 0\n0 0 3\n1\nDirect\n0 0 0\n"), UnsupportedFormat);
  CHECK_THROWS_AS(parse_poscar("x\n1\n3 0 0\n0 3 0\n0 0 3\nH\n2\nDirect\n0 0 0\n"), ParseError);
  CHECK_THROWS_AS(parse_poscar("x\n1\n3 0 0\n0 3 0\n0 0 3\nQq\n1\nDirect\n0 0 0\n"), ParseError);
  CHECK_THROWS_AS(parse_poscar("x\n1\n3 0 0\n0 3 0\n0 0 0\nH\n1\nDirect\n0 0 0\n"), DegenerateCell);
  try {
    parse_poscar("x\n1\n3 0 0\n0 3 zz\n0 0 3\nH\n1\nDirect\n0 0 0\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
    CHECK_THAT(e.what(), ContainsSubstring("line 4"));
  }
}

TEST_CASE("AtomGPT block: Nb3Sn", "[structio]") {
  const auto c = parse_atomgpt_block(kNb3SnBlock);
  const auto p = c.params();
  CHECK(p.a == 5.32);
  CHECK(p.b == 5.32);
  CHECK(p.c == 5.32);
  CHECK(p.alpha == 90);
  CHECK(p.beta == 90);
  CHECK(p.gamma == 90);
  CHECK(c.species() == std::vector<std::string>{"Sn", "Nb", "Nb", "Nb"});
  CHECK(c.frac_coords()[0] == Vec3{0, 0, 0});
  CHECK(c.frac_coords()[1] == Vec3{0, 0.5, 0.5});
  CHECK(c.frac_coords()[2] == Vec3{0.5, 0, 0.5});
  CHECK(c.frac_coords()[3] == Vec3{0.5, 0.5, 0});
  CHECK_THAT(cell_volume(c.lattice()), WithinAbs(150.568768, 1e-6));
}

TEST_CASE("AtomGPT block: whitespace does not matter", "[structio]") {
  const auto canonical = parse_atomgpt_block("1 1 1\n90 90 90\nH 0.0 0.0 0.0\n");
  CHECK(canonical.size() == 1);
  const auto messy = parse_atomgpt_block("\n  1   1\t1  \n\n90  90   90\n\n  H   0.0  0.0\t 0.0   \n\n");
  check_same_crystal(messy, canonical, 0);
  const auto nb = parse_atomgpt_block(kNb3SnBlock);
  check_same_crystal(parse_atomgpt_block(write_atomgpt_block(nb)), nb, 1e-6);
}

TEST_CASE("AtomGPT block errors", "[structio]") {
  CHECK_THROWS_AS(parse_atomgpt_block("1 1\n90 90 90\nH 0 0 0\n"), ParseError);
  CHECK_THROWS_AS(parse_atomgpt_block("1 1 1\n90 90 90\nXx 0 0 0\n"), ParseError);
  CHECK_THROWS_AS(parse_atomgpt_block("1 1 1\n90 90 90\nH 0 zero 0\n"), ParseError);
  CHECK_THROWS_AS(parse_atomgpt_block("1 1 1\n90 90 90\n"), ParseError);
  CHECK_THROWS_AS(parse_atomgpt_block("1 1 1\n120 120 120\nH 0 0 0\n"), DegenerateCell);
  try {
    parse_atomgpt_block("1 1 1\n90 90 90\nH 0 0 0\nH 0 0\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
}

TEST_CASE("random triclinic round trips", "[structio][property]") {
  std::mt19937_64 rng(31);
  const std::vector<std::string> pool{"O", "Ti", "Al", "Nb", "Sn"};
  for (int k = 0; k < 100; ++k) {
    const auto m = params_to_matrix(testing::random_params(rng));
    std::vector<std::string> species;
    std::vector<Vec3> frac;
    for (int i = 0; i < 10; ++i) {
      species.push_back(pool[rng() % pool.size()]);
      frac.push_back(testing::random_frac(rng));
    }
    const Crystal c(species, frac, m);
    const Crystal back = parse_poscar(write_poscar(c));
    // Species are regrouped by first appearance; compare as a multiset of sites.
    REQUIRE(back.size() == c.size());
    CHECK(element_counts(back.species()) == element_counts(c.species()));
    for (std::size_t i = 0; i < c.size(); ++i) {
      bool found = false;
      for (std::size_t j = 0; j < back.size() && !found; ++j)
        found = back.species()[j] == c.species()[i] && same_frac(back.frac_coords()[j], c.frac_coords()[i], 1e-6);
      CHECK(found);
    }
    const Crystal block = parse_atomgpt_block(write_atomgpt_block(c));
    const auto p = c.params(), q = block.params();
    CHECK_THAT(q.a, WithinAbs(p.a, 1e-6));
    CHECK_THAT(q.gamma, WithinAbs(p.gamma, 1e-6));
  }
}

TEST_CASE("golden POSCAR corpus round trips", "[structio][golden]") {
  const fs::path dir = fs::path(ATOMBENCH_TEST_DATA) / "poscar";
  const auto expected = nlohmann::json::parse(read_file(dir / "expected.json"));
  REQUIRE(expected.size() == 20);
  for (const auto& [name, info] : expected.items()) {
    INFO(name);
    const Crystal c = parse_poscar(read_file(dir / name), name);
    CHECK(c.size() == info["sites"].get<std::size_t>());
    CHECK(reduced_formula(c.species()) == info["formula"].get<std::string>());
    CHECK_THAT(cell_volume(c.lattice()), WithinRel(info["volume"].get<double>(), 1e-3));

    const std::string text = write_poscar(c);
    const Crystal again = parse_poscar(text);
    check_same_crystal(again, c, 1e-6);
    CHECK(write_poscar(again) == text);
  }
}

TEST_CASE("fixed6 never prints negative zero", "[structio]") {
  CHECK(fixed6(-0.0) == "0.000000");
  CHECK(fixed6(-1e-9) == "0.000000");
  CHECK(fixed6(-0.5) == "-0.500000");
  CHECK(fixed6(5.32) == "5.320000");
}
