#include <memocr/budget_control.hpp>
#include <memocr/memory_lifecycle.hpp>

#include <benchmark/benchmark.h>

using namespace memocr;

namespace {

MemoryImage page(int height) {
    std::string md;
    while (static_cast<int>(md.size()) < height * 6) {
        md += "# Heading\n\nSome body text that keeps going for a while to fill the line.\n\n";
    }
    return render_memory(md).image;
}

void BM_FitToBudget(benchmark::State& state) {
    const auto img = page(2000);
    const auto budget = state.range(0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_to_budget(img, budget));
    }
    state.SetLabel(std::to_string(img.width()) + "x" + std::to_string(img.height()));
}
BENCHMARK(BM_FitToBudget)->Arg(16)->Arg(64)->Arg(256)->Arg(1024);

void BM_EncodePng(benchmark::State& state) {
    const auto img = page(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(encode_png(img));
    }
}
BENCHMARK(BM_EncodePng)->Arg(200)->Arg(1000);

}  // namespace
