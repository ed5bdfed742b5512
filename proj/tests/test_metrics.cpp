#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <random>

#include "atombench/assignment.hpp"
#include "atombench/error.hpp"
#include "atombench/metrics.hpp"
#include "support/random_cells.hpp"

using namespace atombench;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

LatticeParams cubic(double a) { return {a, a, a, 90, 90, 90}; }

EvalPair make_pair(std::string id, const Crystal& truth, const Crystal& pred) {
  const std::vector<DatasetRecord> t{{id, reduced_formula(truth.species()), 1.0, truth}};
  return pair_structures(t, {{id, pred}}).front();
}

Histogram hist(std::vector<long> counts) {
  Histogram h;
  for (std::size_t i = 0; i <= counts.size(); ++i) h.edges.push_back(static_cast<double>(i));
  h.n_total = std::accumulate(counts.begin(), counts.end(), 0L);
  h.counts = std::move(counts);
  return h;
}

// Smallest sum over all permutations, by enumeration.
double brute_force_assignment(const std::vector<double>& cost, std::size_t n) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += cost[i * n + perm[i]];
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_CASE("MAE examples", "[metrics]") {
  std::vector<EvalPair> pairs;
  const double truth_a[] = {5.0, 6.0, 7.0}, pred_a[] = {5.1, 5.8, 7.3};
  for (int i = 0; i < 3; ++i) {
    const Crystal t({"H"}, {{0, 0, 0}}, params_to_matrix(cubic(truth_a[i])));
    const Crystal p({"H"}, {{0, 0, 0}}, params_to_matrix(cubic(pred_a[i])));
    pairs.push_back(make_pair(std::to_string(i), t, p));
  }
  CHECK_THAT(lattice_mae(pairs, LatticeParam::a), WithinAbs(0.2, 1e-12));
  CHECK(lattice_mae(pairs, LatticeParam::alpha) == 0);
  for (auto& p : pairs) std::swap(p.truth, *p.pred);
  CHECK_THAT(lattice_mae(pairs, LatticeParam::a), WithinAbs(0.2, 1e-12));
  CHECK_THROWS_AS(lattice_mae({}, LatticeParam::a), NoEvaluablePairs);
}

TEST_CASE("shared edges", "[metrics]") {
  const auto e = shared_edges({1, 2}, {3}, 2);
  REQUIRE(e.size() == 3);
  CHECK_THAT(e[0], WithinAbs(1 - 1e-9, 1e-15));
  CHECK_THAT(e[1], WithinAbs(2, 1e-12));
  CHECK_THAT(e[2], WithinAbs(3 + 1e-9, 1e-15));
  const auto ang = shared_edges({88, 91}, {90}, 30, kNiggliAngleDomain);
  CHECK(ang.front() == 60);
  CHECK(ang.back() == 120);
  CHECK(ang.size() == 31);
  CHECK_THROWS_AS(shared_edges({}, {}, 4), EmptyInput);
  CHECK_THROWS_AS(shared_edges({1}, {2}, 1), InvalidArgument);
}

TEST_CASE("every value lands in exactly one bin", "[metrics][property]") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-50, 50);
  std::uniform_int_distribution<int> size(1, 40), bins(2, 40);
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> t(size(rng)), p(size(rng));
    for (double& x : t) x = u(rng);
    for (double& x : p) x = u(rng);
    const auto edges = shared_edges(t, p, bins(rng));
    for (double x : t) {
      const auto i = bin_index(edges, x);
      CHECK(edges[i] <= x);
      CHECK(x < edges[i + 1]);
    }
    const auto h = make_histogram(p, edges);
    CHECK(std::accumulate(h.counts.begin(), h.counts.end(), 0L) == h.n_total);
  }
}

TEST_CASE("KL divergence hand values", "[metrics]") {
  // 0.5 ln 2 + 0.5 ln(2/3)
  CHECK_THAT(kl_divergence(hist({2, 2}), hist({1, 3})), WithinAbs(0.143841, 1e-5));
  CHECK_THAT(kl_divergence(hist({2, 2}), hist({1, 3})),
             WithinAbs(0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0), 1e-8));
  CHECK(kl_divergence(hist({3, 0, 7}), hist({3, 0, 7})) <= 1e-12);
  // Empty prediction bin stays finite thanks to smoothing.
  const double d = kl_divergence(hist({5, 5}), hist({10, 0}));
  CHECK(std::isfinite(d));
  CHECK(d > 1);
  Histogram shifted = hist({1, 1});
  shifted.edges = {0.5, 1.5, 2.5};
  CHECK_THROWS_AS(kl_divergence(hist({1, 1}), shifted), EdgeMismatch);
}

TEST_CASE("KL divergence is nonnegative", "[metrics][property]") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<long> c(0, 50);
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = 2 + k % 20;
    std::vector<long> p(n), q(n);
    for (auto& x : p) x = c(rng);
    for (auto& x : q) x = c(rng);
    p[0] += 1;
    q[0] += 1;
    CHECK(kl_divergence(hist(p), hist(q)) >= 0);
    CHECK(kl_divergence(hist(p), hist(p)) <= 1e-12);
  }
}

TEST_CASE("Hungarian assignment matches brute force", "[metrics][oracle]") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(0, 10);
  for (int k = 0; k < 300; ++k) {
    const std::size_t n = 1 + k % 7;
    std::vector<double> cost(n * n);
    for (double& x : cost) x = (k % 3 == 0) ? std::floor(u(rng)) : u(rng);  // ties too
    const auto a = solve_assignment(cost, n);
    std::vector<std::size_t> cols = a.col_for_row;
    std::sort(cols.begin(), cols.end());
    for (std::size_t i = 0; i < n; ++i) CHECK(cols[i] == i);
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += cost[i * n + a.col_for_row[i]];
    CHECK_THAT(s, WithinAbs(a.cost, 1e-9));
    CHECK_THAT(a.cost, WithinAbs(brute_force_assignment(cost, n), 1e-9));
  }
  CHECK(solve_assignment({}, 0).col_for_row.empty());
}

TEST_CASE("match_atoms examples", "[metrics]") {
  const auto m = params_to_matrix(cubic(5));
  const Crystal t({"Na", "Na", "Cl"}, {{0, 0, 0}, {0.5, 0.5, 0}, {0.5, 0, 0}}, m);
  const auto self = match_atoms(t, t);
  CHECK(self.cost == 0);
  CHECK(self.pred_for_truth == std::vector<std::size_t>{0, 1, 2});
  const Crystal swapped({"Na", "Cl", "Na"}, {{0.5, 0.5, 0}, {0.5, 0, 0}, {0, 0, 0}}, m);
  const auto un = match_atoms(t, swapped);
  CHECK(un.cost == 0);
  CHECK(un.pred_for_truth == std::vector<std::size_t>{2, 0, 1});
  const Crystal other({"Na", "Cl", "Cl"}, {{0, 0, 0}, {0.5, 0.5, 0}, {0.5, 0, 0}}, m);
  CHECK_THROWS_AS(match_atoms(t, other), SpeciesMismatch);
}

TEST_CASE("coord_rmse examples", "[metrics]") {
  const auto m = params_to_matrix(cubic(10));
  const Crystal t({"H"}, {{0, 0, 0}}, m);
  const Crystal p({"H"}, {{0.1, 0, 0}}, m);
  const auto r = coord_rmse(make_pair("h", t, p));
  CHECK_THAT(r.angstrom, WithinAbs(1.0, 1e-12));
  CHECK_THAT(r.normalized, WithinAbs(0.1, 1e-12));
  RmseOptions diag;
  diag.norm = RmseNorm::cell_diagonal;
  CHECK_THAT(coord_rmse(make_pair("h", t, p), diag).normalized, WithinAbs(1.0 / std::sqrt(300.0), 1e-12));
  CHECK(coord_rmse(make_pair("h", t, t)).angstrom == 0);
}

TEST_CASE("coord_rmse rejects pairs that are not ok", "[metrics]") {
  const auto m = params_to_matrix(cubic(4));
  const auto pair = make_pair("x", Crystal({"H"}, {{0, 0, 0}}, m), Crystal({"He"}, {{0, 0, 0}}, m));
  CHECK(pair.status == PairStatus::species_mismatch);
  CHECK_THROWS_AS(coord_rmse(pair), SpeciesMismatch);
}

TEST_CASE("Gaussian jitter gives sigma times sqrt(3)", "[metrics][oracle]") {
  const double sigma = 0.05;
  const auto m = params_to_matrix(cubic(5));
  const Crystal t({"Cu", "Cu", "Cu", "Cu"}, {{0, 0, 0}, {0, 0.5, 0.5}, {0.5, 0, 0.5}, {0.5, 0.5, 0}}, m);
  const Mat3 inv = inverse(m.rows());
  std::mt19937_64 rng(44);
  std::normal_distribution<double> n(0, sigma);
  double sum = 0;
  const int trials = 1000;
  for (int k = 0; k < trials; ++k) {
    std::vector<Vec3> frac;
    for (std::size_t i = 0; i < t.size(); ++i)
      frac.push_back(t.frac_coords()[i] + vecmat(Vec3{n(rng), n(rng), n(rng)}, inv));
    sum += coord_rmse(make_pair("g", t, Crystal(t.species(), frac, m))).angstrom;
  }
  CHECK_THAT(sum / trials, WithinRel(sigma * std::sqrt(3.0), 0.05));
}

TEST_CASE("RMSE invariances", "[metrics][property]") {
  std::mt19937_64 rng(45);
  std::normal_distribution<double> n(0, 0.1);
  for (int k = 0; k < 50; ++k) {
    const auto p = testing::random_params(rng);
    const auto m = params_to_matrix(p);
    std::vector<std::string> species{"O", "O", "O", "Ti", "Ti", "Sr"};
    std::vector<Vec3> ft, fp;
    for (std::size_t i = 0; i < species.size(); ++i) {
      ft.push_back(testing::random_frac(rng));
      fp.push_back(ft.back() + Vec3{n(rng), n(rng), n(rng)});
    }
    const Crystal truth(species, ft, m), pred(species, fp, m);
    const auto base = coord_rmse(make_pair("x", truth, pred));

    // Relabelling prediction sites.
    std::vector<std::size_t> perm{5, 3, 1, 4, 0, 2};
    std::vector<std::string> ps;
    std::vector<Vec3> pf;
    for (auto i : perm) {
      ps.push_back(species[i]);
      pf.push_back(fp[i]);
    }
    CHECK_THAT(coord_rmse(make_pair("x", truth, Crystal(ps, pf, m))).angstrom, WithinAbs(base.angstrom, 1e-9));

    // Rigid rotation of both cells.
    const Mat3 r = testing::random_rotation(rng);
    const LatticeMatrix mr(testing::rotate_rows(m.rows(), r));
    const auto rotated = make_pair("x", Crystal(species, ft, mr), Crystal(species, fp, mr));
    CHECK_THAT(coord_rmse(rotated).angstrom, WithinAbs(base.angstrom, 1e-9));
    const std::vector<EvalPair> a{make_pair("x", truth, pred)}, b{rotated};
    for (auto param : kAllLatticeParams)
      CHECK_THAT(lattice_mae(a, param), WithinAbs(lattice_mae(b, param), 1e-6));

    // Uniform scaling.
    const double s = 1.7;
    const auto ps2 = LatticeParams{p.a * s, p.b * s, p.c * s, p.alpha, p.beta, p.gamma};
    const auto ms = params_to_matrix(ps2);
    const auto scaled = make_pair("x", Crystal(species, ft, ms), Crystal(species, fp, ms));
    CHECK_THAT(coord_rmse(scaled).normalized, WithinRel(base.normalized, 1e-9));
    CHECK_THAT(coord_rmse(scaled).angstrom, WithinRel(base.angstrom * s, 1e-9));
  }
}

TEST_CASE("MAE scales with the cell", "[metrics][property]") {
  std::mt19937_64 rng(46);
  for (int k = 0; k < 50; ++k) {
    const auto pt = testing::random_params(rng), pp = testing::random_params(rng);
    const double s = 2.5;
    auto scale = [s](LatticeParams p) {
      p.a *= s;
      p.b *= s;
      p.c *= s;
      return p;
    };
    const std::vector<EvalPair> base{make_pair("x", Crystal({"H"}, {{0, 0, 0}}, params_to_matrix(pt)),
                                               Crystal({"H"}, {{0, 0, 0}}, params_to_matrix(pp)))};
    const std::vector<EvalPair> big{make_pair("x", Crystal({"H"}, {{0, 0, 0}}, params_to_matrix(scale(pt))),
                                              Crystal({"H"}, {{0, 0, 0}}, params_to_matrix(scale(pp))))};
    CHECK_THAT(lattice_mae(big, LatticeParam::a), WithinRel(s * lattice_mae(base, LatticeParam::a), 1e-9));
    CHECK_THAT(lattice_mae(big, LatticeParam::gamma), WithinAbs(lattice_mae(base, LatticeParam::gamma), 1e-6));
  }
}

TEST_CASE("translation alignment removes a rigid shift", "[metrics]") {
  const auto m = params_to_matrix(cubic(6));
  const Crystal t({"Na", "Cl"}, {{0, 0, 0}, {0.5, 0.5, 0.5}}, m);
  const Crystal p({"Na", "Cl"}, {{0.1, 0.05, 0}, {0.6, 0.55, 0.5}}, m);
  const auto pair = make_pair("s", t, p);
  CHECK(coord_rmse(pair).angstrom > 0.5);
  RmseOptions align;
  align.align_translation = true;
  CHECK_THAT(coord_rmse(pair, align).angstrom, WithinAbs(0, 1e-9));
}

TEST_CASE("list-order matching", "[metrics]") {
  const auto m = params_to_matrix(cubic(4));
  const Crystal t({"H", "H"}, {{0, 0, 0}, {0.5, 0.5, 0.5}}, m);
  const Crystal p({"H", "H"}, {{0.5, 0.5, 0.5}, {0, 0, 0}}, m);
  RmseOptions ordered;
  ordered.match = MatchMode::list_order;
  CHECK(coord_rmse(make_pair("o", t, p)).angstrom == 0);
  CHECK_THAT(coord_rmse(make_pair("o", t, p), ordered).angstrom, WithinAbs(std::sqrt(12.0), 1e-12));
}

TEST_CASE("evaluate on a hand-built fixture", "[metrics]") {
  const double ta[] = {4, 5, 6}, pa[] = {4.1, 5.2, 6.3};
  std::vector<EvalPair> pairs;
  for (int i = 0; i < 3; ++i) {
    const Crystal t({"H"}, {{0, 0, 0}}, params_to_matrix(cubic(ta[i])));
    const Crystal p({"H"}, {{i == 0 ? 0.1 : 0.0, 0, 0}}, params_to_matrix(cubic(pa[i])));
    pairs.push_back(make_pair("p" + std::to_string(i), t, p));
  }
  // One pair without a prediction and one with a different composition.
  const Crystal t4({"H"}, {{0, 0, 0}}, params_to_matrix(cubic(7)));
  pairs.push_back(pair_structures({{"p4", "H", 1.0, t4}}, {}).front());
  pairs.push_back(make_pair("p5", t4, Crystal({"He"}, {{0, 0, 0}}, params_to_matrix(cubic(7)))));

  EvalConfig cfg;
  cfg.nbins = 2;
  const auto rep = evaluate(pairs, cfg);
  CHECK(rep.n_pairs == 5);
  CHECK(rep.n_ok == 3);
  CHECK(rep.n_lattice == 4);
  CHECK(rep.n_skipped_parse == 1);
  CHECK(rep.n_skipped_species == 1);
  // a: |4-4.1| + |5-5.2| + |6-6.3| + |7-7| over 4 pairs.
  CHECK_THAT(rep.mae[0], WithinAbs(0.6 / 4, 1e-12));
  CHECK(rep.mae[3] == 0);
  // Edges (4 - d, 5.65, 7 + d): truth {4, 5, 6, 7} -> (2, 2); pred {4.1, 5.2, 6.3, 7} -> (2, 2).
  CHECK(rep.histograms[0].truth.counts == std::vector<long>{2, 2});
  CHECK(rep.kld[0] <= 1e-12);
  // Only the first pair is displaced: 0.1 * 4 = 0.4 Å, normalised by 4.
  REQUIRE(rep.rmse_mean);
  CHECK_THAT(*rep.rmse_mean, WithinAbs(0.1 / 3, 1e-12));
  CHECK_THAT(*rep.rmse_mean_angstrom, WithinAbs(0.4 / 3, 1e-12));

  std::vector<EvalPair> reversed(pairs.rbegin(), pairs.rend());
  const auto rep2 = evaluate(reversed, cfg);
  CHECK(rep2.mae == rep.mae);
  CHECK(rep2.kld == rep.kld);
  CHECK(*rep2.rmse_mean == *rep.rmse_mean);
}

TEST_CASE("evaluate KLD picks up a shifted distribution", "[metrics]") {
  const double ta[] = {4, 5, 6}, pa[] = {4.1, 5.2, 6.3};
  std::vector<EvalPair> pairs;
  for (int i = 0; i < 3; ++i)
    pairs.push_back(make_pair("p" + std::to_string(i), Crystal({"H"}, {{0, 0, 0}}, params_to_matrix(cubic(ta[i]))),
                              Crystal({"H"}, {{0, 0, 0}}, params_to_matrix(cubic(pa[i])))));
  EvalConfig cfg;
  cfg.nbins = 2;
  const auto rep = evaluate(pairs, cfg);
  // Edges (4 - d, 5.15, 6.3 + d): truth (2, 1) vs pred (1, 2): (1/3) ln 2.
  CHECK_THAT(rep.kld[0], WithinAbs(std::log(2.0) / 3, 1e-7));
  CHECK(rep.kld_sensitivity[0] > 0);
  CHECK_THAT(rep.mae[0], WithinAbs(0.2, 1e-12));
}

TEST_CASE("evaluate self-comparison is exact", "[metrics]") {
  std::mt19937_64 rng(47);
  std::vector<EvalPair> pairs;
  for (int k = 0; k < 40; ++k) {
    const Crystal c({"Nb", "Nb", "Sn"}, {testing::random_frac(rng), testing::random_frac(rng), testing::random_frac(rng)},
                    params_to_matrix(testing::random_params(rng)));
    pairs.push_back(make_pair("s" + std::to_string(k), c, c));
  }
  const auto rep = evaluate(pairs);
  for (int i = 0; i < 6; ++i) {
    CHECK(rep.mae[i] == 0);
    CHECK(rep.kld[i] <= 1e-6);
  }
  CHECK(*rep.rmse_mean == 0);
  CHECK_THROWS_AS(evaluate({}), NoEvaluablePairs);
}
