// Benchmark: serial reference sweep vs. OpenMP per-household kernels on the
// default synthetic panel. The two paths produce bit-identical chains (each
// household owns an rng stream), so this compares wall time only.

#include <omp.h>

#include <chrono>
#include <cstdio>

#include "hbprobit/gibbs.hpp"
#include "hbprobit/synth.hpp"

using namespace hbprobit;

namespace {

double run_ms(const PanelDataset& data, const BrandAttributeMatrix& attrs,
              const PriorConfig& priors, const McmcConfig& config, int threads) {
  const auto start = std::chrono::steady_clock::now();
  run_chain(data, attrs, priors, config, RngKey::root(config.rng_seed),
            EngineOptions{threads});
  const auto end = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(end - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  int iterations = 200;
  if (argc > 1) iterations = std::atoi(argv[1]);

  GeneratorSpec spec = GeneratorSpec::defaults();
  const GeneratedPanel generated = generate_panel(spec, RngKey::root(spec.seed));

  McmcConfig config;
  config.n_iterations = iterations;
  config.n_burn_in = iterations - 1;
  const PriorConfig priors = PriorConfig::defaults(spec.attributes.n_attributes());

  std::printf("panel: %d households, %d brands, %d occasions/household, %d iterations\n",
              spec.n_households, spec.n_brands, spec.n_occasions, iterations);

  const double serial = run_ms(generated.panel, spec.attributes, priors, config, 1);
  std::printf("%-10s %10.1f ms  %8.3f ms/iter  speedup %5.2fx\n", "serial",
              serial, serial / iterations, 1.0);

  const int max_threads = std::max(4, omp_get_max_threads());
  for (int threads = 2; threads <= max_threads; threads *= 2) {
    const double t = run_ms(generated.panel, spec.attributes, priors, config, threads);
    std::printf("%-7s %2d %10.1f ms  %8.3f ms/iter  speedup %5.2fx\n", "openmp",
                threads, t, t / iterations, serial / t);
  }
  std::printf("(thread counts beyond the available cores are shown for "
              "completeness; chains are bit-identical at every setting)\n");
  return 0;
}
