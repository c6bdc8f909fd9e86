// Serial vs OpenMP timings for the hot kernels.
//   bench_kernels [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <omp.h>

#include "sensprune/kernels.hpp"
#include "sensprune/rng.hpp"

using namespace sensprune;

namespace {

double time_ms(const std::function<void()>& f, int repeats) {
  const auto start = std::chrono::steady_clock::now();
  for (int r = 0; r < repeats; ++r) f();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() / repeats;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = rng.normal();
  return m;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-22s serial %9.3f ms   parallel %9.3f ms   speedup %5.2fx\n", name, serial,
              parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 5;
  std::printf("threads: %d\n", omp_get_max_threads());
  Rng rng(2024);

  {
    const Matrix w = random_matrix(1024, 784, rng);
    std::vector<double> bias(1024, 0.1), x(784, 0.5), y(1024);
    report("dense 784->1024",
           time_ms([&] { kernels::dense_linear_serial(w, bias, x, y); }, repeats * 20),
           time_ms([&] { kernels::dense_linear_parallel(w, bias, x, y); }, repeats * 20));
  }
  {
    kernels::ConvGeometry g;
    g.in_channels = 16;
    g.in_height = g.in_width = 32;
    g.out_channels = 32;
    g.kernel_height = g.kernel_width = 3;
    std::vector<double> k(32 * 16 * 9), b(32, 0.0), in(16 * 32 * 32),
        out(32 * g.out_height() * g.out_width());
    for (auto& v : k) v = rng.normal();
    for (auto& v : in) v = rng.uniform();
    report("conv 16->32 3x3 32x32",
           time_ms([&] { kernels::conv2d_linear_serial(g, k, b, in, out); }, repeats),
           time_ms([&] { kernels::conv2d_linear_parallel(g, k, b, in, out); }, repeats));
  }
  {
    const Matrix points = random_matrix(1000, 784, rng);
    const Matrix queries = random_matrix(256, 784, rng);
    const auto phi = Activation::relu();
    report("activation 1000x256",
           time_ms([&] { (void)kernels::activation_matrix_serial(points, {}, queries, phi); }, repeats),
           time_ms([&] { (void)kernels::activation_matrix_parallel(points, {}, queries, phi); }, repeats));
    const Matrix act = kernels::activation_matrix_serial(points, {}, queries, phi);
    std::vector<std::size_t> rows(1000);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    const Matrix w = random_matrix(64, 1000, rng);
    report("combine k=64",
           time_ms([&] { (void)kernels::combine_serial(act, rows, w); }, repeats),
           time_ms([&] { (void)kernels::combine_parallel(act, rows, w); }, repeats));
  }
  return 0;
}
