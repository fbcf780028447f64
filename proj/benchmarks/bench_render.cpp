#include <memocr/memory_lifecycle.hpp>
#include <memocr/mock_clients.hpp>
#include <memocr/render_service.hpp>
#include <memocr/synthetic_suite.hpp>

#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

using namespace memocr;

namespace {

std::string fixture(int i) {
    char name[32];
    std::snprintf(name, sizeof name, "doc%02d.md", i);
    std::ifstream in(std::string(MEMOCR_SOURCE_DIR) + "/tests/fixtures/render/" + name, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// A memory of roughly `lines` body paragraphs under a few headings.
std::string memory_of(int lines) {
    std::string md;
    for (int i = 0; i < lines; ++i) {
        if (i % 10 == 0) {
            md += "# Section " + std::to_string(i / 10) + "\n\n";
        }
        md += "Entry " + std::to_string(i) + " records a **detail** about the long archive that the reader may need.\n\n";
    }
    return md;
}

void BM_Parse(benchmark::State& state) {
    const std::string md = memory_of(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(parse(md));
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * md.size()));
}
BENCHMARK(BM_Parse)->Arg(10)->Arg(100)->Arg(400);

void BM_Layout(benchmark::State& state) {
    const auto tree = parse(memory_of(static_cast<int>(state.range(0))));
    const auto style = StyleSheet::defaults();
    for (auto _ : state) {
        benchmark::DoNotOptimize(layout(tree, style));
    }
}
BENCHMARK(BM_Layout)->Arg(10)->Arg(100)->Arg(400);

void BM_Rasterize(benchmark::State& state) {
    const auto page = layout(parse(memory_of(static_cast<int>(state.range(0)))), StyleSheet::defaults());
    for (auto _ : state) {
        benchmark::DoNotOptimize(rasterize(page));
    }
}
BENCHMARK(BM_Rasterize)->Arg(10)->Arg(100)->Arg(400);

void BM_RenderMemory(benchmark::State& state) {
    const std::string md = fixture(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(render_memory(md));
    }
}
BENCHMARK(BM_RenderMemory)->Arg(5)->Arg(14)->Arg(20);

void BM_HandleRender(benchmark::State& state) {
    std::string body = "{\"markdown\": \"";
    for (char c : fixture(20)) {
        if (c == '\n') {
            body += "\\n";
        } else if (c == '"' || c == '\\') {
            body += '\\';
            body += c;
        } else {
            body += c;
        }
    }
    body += "\", \"budget\": " + std::to_string(state.range(0)) + "}";
    for (auto _ : state) {
        benchmark::DoNotOptimize(handle_render(body));
    }
}
BENCHMARK(BM_HandleRender)->Arg(16)->Arg(256)->Arg(1024);

void BM_MockLifecycle(benchmark::State& state) {
    const std::string ctx = synthetic_filler(static_cast<std::size_t>(state.range(0)), 1);
    const auto stream = chunk_stream(ctx, kDefaultChunkSize);
    for (auto _ : state) {
        MockDrafter drafter(MockDrafterConfig{});
        benchmark::DoNotOptimize(run_lifecycle(stream, "Who wrote the song Velvet Harbor?", drafter));
    }
}
BENCHMARK(BM_MockLifecycle)->Arg(10000)->Arg(100000);

}  // namespace
