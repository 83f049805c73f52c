#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "captune/media_context.hpp"
#include "test_support.hpp"

#include <atomic>
#include <thread>
#include <vector>

using namespace captune;
using namespace std::chrono_literals;
using test::code_of;

namespace {

CaptionCue cue(int index, Millis start, Millis end) {
    CaptionCue c;
    c.index = index;
    c.start = start;
    c.end = end;
    c.text = "[Thunder]";
    c.kind = CueKind::Nsi;
    return c;
}

class CountingDescriber : public DescriberBackend {
public:
    std::string describe(const ContextWindow& w) override {
        ++calls;
        std::this_thread::sleep_for(2ms);
        return "scene " + std::to_string(w.cue_index);
    }
    std::atomic<int> calls{0};
};

} // namespace

TEST_CASE("context windows pad five seconds on each side") {
    auto w = compute_window(cue(4, 12000ms, 14500ms));
    CHECK(w.cue_index == 4);
    CHECK(w.window_start == 7000ms);
    CHECK(w.window_end == 19500ms);

    w = compute_window(cue(1, 2000ms, 3000ms));
    CHECK(w.window_start == 0ms);
    CHECK(w.window_end == 8000ms);

    w = compute_window(cue(9, 60000ms, 62000ms), 64000ms);
    CHECK(w.window_start == 55000ms);
    CHECK(w.window_end == 64000ms);

    // A duration shorter than the cue never cuts into it.
    w = compute_window(cue(9, 60000ms, 62000ms), 61000ms);
    CHECK(w.window_end == 62000ms);
    CHECK_FALSE(w.description.has_value());
}

TEST_CASE("sidecar descriptions") {
    const auto d = SidecarDescriber::from_json(test::read(test::fixtures() / "projects/bella.descriptions.json"));
    CHECK(d.entries().size() == 4);
    CHECK(d.entries().count(4) == 1);
    SidecarDescriber copy = d;
    CHECK(copy.describe(compute_window(cue(4, 1000ms, 2000ms))) == d.entries().at(4));
    CHECK(copy.describe(compute_window(cue(2, 1000ms, 2000ms))) == kNoDescription);

    CHECK(code_of([] { SidecarDescriber::from_json("[1,2]"); }) == ErrorCode::ValidationFailed);
    CHECK(code_of([] { SidecarDescriber::from_json("{\"x\": \"a\"}"); }) == ErrorCode::ValidationFailed);
    CHECK(code_of([] { SidecarDescriber::from_json("{\"0\": \"a\"}"); }) == ErrorCode::ValidationFailed);
    CHECK(code_of([] { SidecarDescriber::from_json("{\"3\": 5}"); }) == ErrorCode::ValidationFailed);
    const auto e = test::error_of([] { SidecarDescriber::from_json("{\"3\": "); });
    CHECK(e.code() == ErrorCode::ValidationFailed);
    CHECK(e.details().at("path") == "$");
}

TEST_CASE("each window is described at most once, even under contention") {
    CountingDescriber describer;
    DescriptionCache cache;
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t) {
        threads.emplace_back([&] {
            for (int i = 1; i <= 5; ++i) {
                CHECK(cache.get_or_describe(compute_window(cue(i, 10000ms, 11000ms)), describer) ==
                      "scene " + std::to_string(i));
            }
        });
    }
    for (auto& t : threads) t.join();
    CHECK(describer.calls == 5);
    CHECK(cache.describer_calls() == 5);
    CHECK(cache.snapshot().size() == 5);
    CHECK(cache.lookup(3) == "scene 3");
    CHECK_FALSE(cache.lookup(6).has_value());
    cache.put(6, "given");
    CHECK(cache.get_or_describe(compute_window(cue(6, 0ms, 1000ms)), describer) == "given");
    CHECK(describer.calls == 5);
}
