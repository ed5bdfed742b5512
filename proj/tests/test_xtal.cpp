#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "atombench/error.hpp"
#include "atombench/xtal.hpp"
#include "support/random_cells.hpp"

using namespace atombench;
using Catch::Approx;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const LatticeParams kHex{3, 3, 5, 90, 90, 120};

}  // namespace

TEST_CASE("params_to_matrix: cubic cell is diagonal", "[xtal]") {
  const auto m = params_to_matrix({2, 2, 2, 90, 90, 90});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(m.rows()[i][j] == (i == j ? 2.0 : 0.0));
}

TEST_CASE("params_to_matrix: 5.32 cubic cell", "[xtal]") {
  const auto m = params_to_matrix({5.32, 5.32, 5.32, 90, 90, 90});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(m.rows()[i][j] == (i == j ? 5.32 : 0.0));
}

TEST_CASE("params_to_matrix: hexagonal cell", "[xtal]") {
  const auto r = params_to_matrix(kHex).rows();
  // b = (b cos(gamma), b sin(gamma), 0)
  const double expected[3][3] = {{3, 0, 0}, {-1.5, 2.598076, 0}, {0, 0, 5}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK_THAT(r[i][j], WithinAbs(expected[i][j], 1e-6));
}

TEST_CASE("matrix_to_params inverts the hexagonal example", "[xtal]") {
  const LatticeMatrix m(Mat3{{{3, 0, 0}, {-1.5, 2.598076, 0}, {0, 0, 5}}});
  const auto p = matrix_to_params(m);
  CHECK_THAT(p.a, WithinAbs(3, 1e-6));
  CHECK_THAT(p.b, WithinAbs(3, 1e-6));
  CHECK_THAT(p.c, WithinAbs(5, 1e-12));
  CHECK_THAT(p.alpha, WithinAbs(90, 1e-9));
  CHECK_THAT(p.beta, WithinAbs(90, 1e-9));
  CHECK_THAT(p.gamma, WithinAbs(120, 1e-4));
}

TEST_CASE("params round trip on random cells", "[xtal][property]") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 1000; ++k) {
    const auto p = testing::random_params(rng);
    const auto q = matrix_to_params(params_to_matrix(p));
    INFO("cell " << k);
    CHECK_THAT(q.a, WithinRel(p.a, 1e-9));
    CHECK_THAT(q.b, WithinRel(p.b, 1e-9));
    CHECK_THAT(q.c, WithinRel(p.c, 1e-9));
    CHECK_THAT(q.alpha, WithinAbs(p.alpha, 1e-7));
    CHECK_THAT(q.beta, WithinAbs(p.beta, 1e-7));
    CHECK_THAT(q.gamma, WithinAbs(p.gamma, 1e-7));
  }
}

TEST_CASE("degenerate parameters are rejected", "[xtal]") {
  CHECK_THROWS_AS(validate({0, 1, 1, 90, 90, 90}), DegenerateCell);
  CHECK_THROWS_AS(validate({1, 1, 1, 180, 90, 90}), DegenerateCell);
  CHECK_THROWS_AS(validate({1, 1, 1, 120, 120, 120}), DegenerateCell);
  CHECK_THROWS_AS(params_to_matrix({1, 1, 1, 10, 100, 90}), DegenerateCell);
  CHECK_THROWS_AS(validate({1, 1, 1, 30, 30, 150}), DegenerateCell);
  CHECK_NOTHROW(validate({1, 1, 1, 119, 119, 119}));
}

TEST_CASE("LatticeMatrix rejects zero rows and coplanar bases", "[xtal]") {
  CHECK_THROWS_AS(LatticeMatrix(Mat3{{{1, 0, 0}, {0, 0, 0}, {0, 0, 1}}}), DegenerateCell);
  CHECK_THROWS_AS(LatticeMatrix(Mat3{{{1, 0, 0}, {0, 1, 0}, {1, 1, 0}}}), DegenerateCell);
}

TEST_CASE("left-handed input is mirrored and flagged", "[xtal]") {
  const Mat3 left{{{0, 1, 0}, {1, 0, 0}, {0, 0, 2}}};
  const LatticeMatrix m(left);
  CHECK(m.handedness_flipped());
  CHECK(det(m.rows()) > 0);
  const auto p = matrix_to_params(m);
  CHECK(p.a == Approx(1));
  CHECK(p.c == Approx(2));
  CHECK(p.gamma == Approx(90));
  CHECK_FALSE(params_to_matrix(p).handedness_flipped());
}

TEST_CASE("metric tensor", "[xtal]") {
  const auto g = metric_tensor(params_to_matrix({2, 2, 2, 90, 90, 90}));
  CHECK(g[0][0] == 4);
  CHECK(g[1][1] == 4);
  CHECK(g[2][2] == 4);
  CHECK(g[0][1] == 0);
  CHECK_THAT(metric_tensor(params_to_matrix(kHex))[0][1], WithinAbs(-4.5, 1e-12));
}

TEST_CASE("metric tensor is invariant under rotation", "[xtal][property]") {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 100; ++k) {
    const auto m = params_to_matrix(testing::random_params(rng));
    const LatticeMatrix rotated(testing::rotate_rows(m.rows(), testing::random_rotation(rng)));
    const auto g0 = metric_tensor(m), g1 = metric_tensor(rotated);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK_THAT(g1[i][j], WithinAbs(g0[i][j], 1e-8));
    // Positive definite: leading principal minors.
    CHECK(g0[0][0] > 0);
    CHECK(g0[0][0] * g0[1][1] - g0[0][1] * g0[1][0] > 0);
    CHECK(det(g0) > 0);
  }
}

TEST_CASE("cell volume", "[xtal]") {
  CHECK(cell_volume(params_to_matrix({2, 2, 2, 90, 90, 90})) == Approx(8).epsilon(1e-15));
  CHECK_THAT(cell_volume(params_to_matrix({5.32, 5.32, 5.32, 90, 90, 90})),
             WithinAbs(150.568768, 1e-6));
  CHECK_THAT(cell_volume(params_to_matrix(kHex)), WithinAbs(3 * 3 * std::sin(deg2rad(120)) * 5, 1e-9));
  CHECK_THAT(cell_volume(params_to_matrix(kHex)), WithinAbs(38.9711, 1e-3));
}

TEST_CASE("cell volume matches the closed form", "[xtal][property]") {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 1000; ++k) {
    const auto p = testing::random_params(rng);
    CHECK_THAT(cell_volume(params_to_matrix(p)), WithinRel(testing::closed_form_volume(p), 1e-8));
  }
}

TEST_CASE("min_image_delta examples", "[xtal]") {
  const auto cube = params_to_matrix({10, 10, 10, 90, 90, 90});
  CHECK(min_image_delta({0.3, 0.2, 0.1}, {0.3, 0.2, 0.1}, cube).distance == 0);
  CHECK_THAT(min_image_delta({0.95, 0, 0}, {0.05, 0, 0}, cube).distance, WithinAbs(1.0, 1e-12));
  const auto d = min_image_delta({0.95, 0, 0}, {0.05, 0, 0}, cube).cartesian;
  CHECK_THAT(d[0], WithinAbs(1.0, 1e-12));
}

TEST_CASE("min_image_delta is symmetric and never longer than the direct vector", "[xtal][property]") {
  std::mt19937_64 rng(14);
  for (int k = 0; k < 1000; ++k) {
    const auto m = params_to_matrix(testing::random_params(rng));
    const Vec3 f1 = testing::random_frac(rng), f2 = testing::random_frac(rng);
    const double d12 = min_image_delta(f1, f2, m).distance;
    const double d21 = min_image_delta(f2, f1, m).distance;
    CHECK_THAT(d12, WithinAbs(d21, 1e-12));
    CHECK(d12 <= norm(vecmat(f2 - f1, m.rows())) + 1e-12);
  }
}

TEST_CASE("min_image_delta finds the true minimum in a skewed cell", "[xtal]") {
  // Strongly sheared cell where componentwise wrapping alone is not minimal.
  const LatticeMatrix m(Mat3{{{1, 0, 0}, {0.9, 1, 0}, {0, 0, 1}}});
  const Vec3 f1{0, 0, 0}, f2{0.45, 0.45, 0};
  double best = 1e9;
  for (int i = -2; i <= 2; ++i)
    for (int j = -2; j <= 2; ++j)
      for (int k = -2; k <= 2; ++k)
        best = std::min(best, norm(vecmat(f2 - f1 + Vec3{double(i), double(j), double(k)}, m.rows())));
  CHECK_THAT(min_image_delta(f1, f2, m).distance, WithinAbs(best, 1e-12));
}

TEST_CASE("wrap_frac maps into [0, 1)", "[xtal]") {
  const Vec3 w = wrap_frac({-0.25, 1.0, 2.75});
  CHECK(w[0] == 0.75);
  CHECK(w[1] == 0.0);
  CHECK(w[2] == 0.75);
  const Vec3 tiny = wrap_frac({-1e-18, 0, 0});
  CHECK(tiny[0] >= 0.0);
  CHECK(tiny[0] < 1.0);
}

TEST_CASE("Crystal validates and wraps", "[xtal]") {
  const auto m = params_to_matrix({4, 4, 4, 90, 90, 90});
  const Crystal c({"Na", "Cl"}, {{0, 0, 0}, {1.5, -0.5, 0.5}}, m, "test");
  CHECK(c.size() == 2);
  CHECK(c.frac_coords()[1] == Vec3{0.5, 0.5, 0.5});
  CHECK(c.provenance() == "test");
  CHECK_THROWS_AS(Crystal({}, {}, m), InvalidCrystal);
  CHECK_THROWS_AS(Crystal({"Na"}, {{0, 0, 0}, {0, 0, 0}}, m), InvalidCrystal);
  CHECK_THROWS_AS(Crystal({"Xx"}, {{0, 0, 0}}, m), InvalidCrystal);
  CHECK_THROWS_AS(Crystal({"na"}, {{0, 0, 0}}, m), InvalidCrystal);
  CHECK_THROWS_AS(Crystal({"Na"}, {{std::nan(""), 0, 0}}, m), InvalidCrystal);
  CHECK_NOTHROW(Crystal({"Og"}, {{0, 0, 0}}, m));
}

TEST_CASE("formula helpers", "[xtal]") {
  CHECK(reduced_formula({"Sn", "Nb", "Nb", "Nb"}) == "Nb3Sn");
  CHECK(reduced_formula({"O", "H", "H", "O", "H", "H"}) == "H2O");
  CHECK(reduced_formula({"Fe"}) == "Fe");
  CHECK(parse_formula("Nb3Sn") == std::map<std::string, long>{{"Nb", 3}, {"Sn", 1}});
  CHECK(parse_formula("YBa2Cu3O7") ==
        std::map<std::string, long>{{"Y", 1}, {"Ba", 2}, {"Cu", 3}, {"O", 7}});
  CHECK_THROWS_AS(parse_formula("Nb3(Sn)"), ParseError);
  CHECK_THROWS_AS(parse_formula("Qq2"), ParseError);
  CHECK_THROWS_AS(parse_formula(""), ParseError);
  CHECK(same_composition(parse_formula("Nb6Sn2"), element_counts({"Sn", "Nb", "Nb", "Nb"})));
  CHECK_FALSE(same_composition(parse_formula("NbSn"), element_counts({"Sn", "Nb", "Nb", "Nb"})));
}
