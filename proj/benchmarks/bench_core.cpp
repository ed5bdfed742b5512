#include <map>
#include <random>

#include <benchmark/benchmark.h>

#include "atombench/metrics.hpp"
#include "atombench/niggli.hpp"
#include "atombench/protocol.hpp"

using namespace atombench;

namespace {

LatticeMatrix random_cell(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> len(2, 12), ang(60, 120);
  for (;;) {
    const LatticeParams p{len(rng), len(rng), len(rng), ang(rng), ang(rng), ang(rng)};
    try {
      validate(p);
      return params_to_matrix(p);
    } catch (const std::exception&) {
    }
  }
}

Crystal random_crystal(std::mt19937_64& rng, std::size_t sites) {
  static const char* pool[] = {"Nb", "Sn", "Ti", "O"};
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<std::string> species;
  std::vector<Vec3> frac;
  for (std::size_t i = 0; i < sites; ++i) {
    species.push_back(pool[i % 4]);
    frac.push_back({u(rng), u(rng), u(rng)});
  }
  return Crystal(species, frac, random_cell(rng));
}

void BM_NiggliReduce(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::vector<LatticeMatrix> cells;
  for (int i = 0; i < 256; ++i) {
    // Skew each cell so reduction has work to do.
    const Mat3 m = random_cell(rng).rows();
    cells.emplace_back(Mat3{m[0], m[1], m[2] + 3.0 * m[0] - 2.0 * m[1]});
  }
  std::size_t k = 0;
  for (auto _ : state) benchmark::DoNotOptimize(niggli_reduce(cells[k++ % cells.size()]));
}
BENCHMARK(BM_NiggliReduce);

void BM_MatchAtoms(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto sites = static_cast<std::size_t>(state.range(0));
  const Crystal t = random_crystal(rng, sites);
  std::normal_distribution<double> n(0, 0.02);
  std::vector<Vec3> frac;
  for (const auto& f : t.frac_coords()) frac.push_back(f + Vec3{n(rng), n(rng), n(rng)});
  const Crystal p(t.species(), frac, t.lattice());
  for (auto _ : state) benchmark::DoNotOptimize(match_atoms(t, p));
}
BENCHMARK(BM_MatchAtoms)->Arg(4)->Arg(8)->Arg(32);

// Pairing plus evaluation over a synthetic set the size of the larger
// dataset.
void BM_Evaluate(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<DatasetRecord> truth;
  std::map<std::string, Crystal> preds;
  std::normal_distribution<double> jitter(0, 0.01);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = random_crystal(rng, 1 + i % 8);
    const std::string id = "s" + std::to_string(i);
    truth.push_back({id, reduced_formula(c.species()), 1.0, c});
    std::vector<Vec3> frac;
    for (const auto& f : c.frac_coords()) frac.push_back(f + Vec3{jitter(rng), jitter(rng), jitter(rng)});
    preds.emplace(id, Crystal(c.species(), frac, c.lattice()));
  }
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(pair_structures(truth, preds)));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_Evaluate)->Arg(1058)->Arg(8253)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
