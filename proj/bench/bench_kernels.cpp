// Serial reference vs OpenMP kernels at the classifier's default sizes.

#include <benchmark/benchmark.h>

#include "depsum/kernels.hpp"
#include "depsum/rng.hpp"

using namespace depsum;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(r, c);
  for (auto& v : m.data) v = rng.uniform(-1, 1);
  return m;
}

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1, 1);
  return v;
}

constexpr std::size_t kBatch = 16;
constexpr std::size_t kIn = 768;
constexpr std::size_t kOut = 1536;

template <auto Fn>
void BM_dense_forward(benchmark::State& state) {
  const auto x = random_matrix(kBatch, kIn, 1), w = random_matrix(kOut, kIn, 2);
  const auto b = random_vec(kOut, 3);
  Matrix y;
  for (auto _ : state) {
    Fn(x, w, b, y);
    benchmark::DoNotOptimize(y.data.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(kBatch * kIn * kOut));
}

template <auto Fn>
void BM_dense_backward_input(benchmark::State& state) {
  const auto dy = random_matrix(kBatch, kOut, 1), w = random_matrix(kOut, kIn, 2);
  Matrix dx;
  for (auto _ : state) {
    Fn(dy, w, dx);
    benchmark::DoNotOptimize(dx.data.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(kBatch * kIn * kOut));
}

template <auto Fn>
void BM_dense_backward_params(benchmark::State& state) {
  const auto x = random_matrix(kBatch, kIn, 1), dy = random_matrix(kBatch, kOut, 2);
  Matrix dw(kOut, kIn);
  std::vector<double> db(kOut);
  for (auto _ : state) {
    Fn(x, dy, dw, db);
    benchmark::DoNotOptimize(dw.data.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(kBatch * kIn * kOut));
}

const kernels::ConvShape kConv{1, 16, 3, 1536};

template <auto Fn>
void BM_conv1d_forward(benchmark::State& state) {
  const auto x = random_matrix(kBatch, kConv.in_width(), 1);
  const auto w = random_vec(kConv.weight_size(), 2), b = random_vec(kConv.out_channels, 3);
  Matrix y;
  for (auto _ : state) {
    Fn(x, kConv, w, b, y);
    benchmark::DoNotOptimize(y.data.data());
  }
}

template <auto Fn>
void BM_conv1d_backward_params(benchmark::State& state) {
  const auto x = random_matrix(kBatch, kConv.in_width(), 1);
  const auto dy = random_matrix(kBatch, kConv.out_width(), 2);
  std::vector<double> dw(kConv.weight_size()), db(kConv.out_channels);
  for (auto _ : state) {
    Fn(x, dy, kConv, dw, db);
    benchmark::DoNotOptimize(dw.data());
  }
}

template <auto Fn>
void BM_cosine_matrix(benchmark::State& state) {
  const auto m = random_matrix(static_cast<std::size_t>(state.range(0)), 768, 4);
  for (auto _ : state) {
    auto s = Fn(m);
    benchmark::DoNotOptimize(s.data.data());
  }
}

}  // namespace

BENCHMARK(BM_dense_forward<kernels::serial::dense_forward>)->Name("dense_forward/serial");
BENCHMARK(BM_dense_forward<kernels::parallel::dense_forward>)->Name("dense_forward/parallel");
BENCHMARK(BM_dense_backward_input<kernels::serial::dense_backward_input>)->Name("dense_backward_input/serial");
BENCHMARK(BM_dense_backward_input<kernels::parallel::dense_backward_input>)->Name("dense_backward_input/parallel");
BENCHMARK(BM_dense_backward_params<kernels::serial::dense_backward_params>)->Name("dense_backward_params/serial");
BENCHMARK(BM_dense_backward_params<kernels::parallel::dense_backward_params>)->Name("dense_backward_params/parallel");
BENCHMARK(BM_conv1d_forward<kernels::serial::conv1d_forward>)->Name("conv1d_forward/serial");
BENCHMARK(BM_conv1d_forward<kernels::parallel::conv1d_forward>)->Name("conv1d_forward/parallel");
BENCHMARK(BM_conv1d_backward_params<kernels::serial::conv1d_backward_params>)->Name("conv1d_backward_params/serial");
BENCHMARK(BM_conv1d_backward_params<kernels::parallel::conv1d_backward_params>)->Name("conv1d_backward_params/parallel");
BENCHMARK(BM_cosine_matrix<kernels::serial::cosine_matrix>)->Name("cosine_matrix/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_cosine_matrix<kernels::parallel::cosine_matrix>)->Name("cosine_matrix/parallel")->Arg(64)->Arg(256);

BENCHMARK_MAIN();
