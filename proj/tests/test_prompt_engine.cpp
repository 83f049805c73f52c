#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "captune/prompt_engine.hpp"
#include "test_support.hpp"

using namespace captune;
using doctest::Approx;
using test::code_of;

namespace {

CaptionCue thunder() {
    CaptionCue c;
    c.index = 4;
    c.start = std::chrono::milliseconds(12000);
    c.end = std::chrono::milliseconds(14000);
    c.text = "[Thunder crashes violently]";
    c.kind = CueKind::Nsi;
    c.category = NsiCategory::EnvironmentSound;
    return c;
}

const TransformSpace& jamie_space() {
    static const TransformSpace s({3, 2}, {2, 2}, {8, 7});
    return s;
}

VideoMetadata meta() { return {"Bella", "animation", "A kitten waits out a storm."}; }

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

} // namespace

TEST_CASE("the viewer's request at (6,5) quantifies as in the worked example") {
    ViewerPrefs prefs{{6, 5}, SoundRepresentation::Default, false};
    const auto req = build_request(thunder(), jamie_space(), prefs, meta());
    CHECK(req.detail.r == Approx(0.6667).epsilon(1e-3));
    CHECK(req.detail.delta == Approx(0.5));
    CHECK(req.expressiveness.r == Approx(0.6));
    CHECK(req.expressiveness.delta == Approx(0.6));
    CHECK(percent(req.detail.r) == 67);
    CHECK(percent(1 - req.detail.r) == 33);
    CHECK(percent(req.detail.delta) == 50);
    CHECK(percent(req.expressiveness.r) == 60);
    CHECK(percent(1 - req.expressiveness.r) == 40);
    CHECK(percent(req.expressiveness.delta) == 60);
    CHECK(req.current_values == ParamPoint{3, 2});
    CHECK_FALSE(is_identity(req));

    const std::string prompt = render_prompt(req);
    CHECK(contains(prompt, "Level of Detail (target 6, current 3, anchors 2 to 8)"));
    CHECK(contains(prompt, "distance from minimal anchor: 67%"));
    CHECK(contains(prompt, "distance from maximal anchor: 33%"));
    CHECK(contains(prompt, "requested change: +50%"));
    CHECK(contains(prompt, "distance from minimal anchor: 60%"));
    CHECK(contains(prompt, "distance from maximal anchor: 40%"));
    CHECK(contains(prompt, "requested change: +60%"));
    CHECK(contains(prompt, "Original caption: [Thunder crashes violently]"));
    CHECK(contains(prompt, "prompt_version: 1"));
    CHECK_FALSE(contains(prompt, "Genre Alignment"));
    CHECK_FALSE(contains(prompt, "Scene context"));
}

TEST_CASE("prompt text follows the request options") {
    ViewerPrefs prefs{{2, 2}, SoundRepresentation::Onomatopoeia, true};
    RequestContext ctx;
    ctx.scene_context = "A storm rolls over a farmhouse.";
    ctx.anchor_texts = AnchorTexts{"[Thunder]", std::nullopt};
    const auto req = build_request(thunder(), jamie_space(), prefs, meta(), ctx);
    const std::string prompt = render_prompt(req);
    CHECK(contains(prompt, "requested change: -17%"));
    CHECK(contains(prompt, "requested change: 0%"));
    CHECK(contains(prompt, "Onomatopoeia"));
    CHECK(contains(prompt, "Genre Alignment"));
    CHECK(contains(prompt, "(animation)"));
    CHECK(contains(prompt, "Scene context: A storm rolls over a farmhouse."));
    CHECK(contains(prompt, "Minimal anchor caption: [Thunder]"));
    CHECK_FALSE(contains(prompt, "Maximal anchor caption"));
    // Same input, same bytes.
    CHECK(render_prompt(build_request(thunder(), jamie_space(), prefs, meta(), ctx)) == prompt);
}

TEST_CASE("percent rounds half up") {
    CHECK(percent(0.285) == 29);
    CHECK(percent(0.284) == 28);
    CHECK(percent(0.005) == 1);
    CHECK(percent(-0.005) == 0);
    CHECK(percent(-0.5) == -50);
    CHECK(percent(1.0) == 100);
    CHECK(percent(2.0 / 3.0) == 67);
    CHECK(format_value(7.2) == "7.2");
    CHECK(format_value(3) == "3");
    CHECK(format_value(20.0 / 3.0) == "6.67");
    CHECK(format_value(-0.001) == "0");
}

TEST_CASE("identity requests") {
    ViewerPrefs prefs{{3, 2}, SoundRepresentation::Default, false};
    auto req = build_request(thunder(), jamie_space(), prefs, meta());
    CHECK(is_identity(req));
    prefs.representation = SoundRepresentation::SensoryQuality;
    CHECK_FALSE(is_identity(build_request(thunder(), jamie_space(), prefs, meta())));
    prefs.representation = SoundRepresentation::Default;
    prefs.genre_aligned = true;
    CHECK_FALSE(is_identity(build_request(thunder(), jamie_space(), prefs, meta())));
    // Measured from the cue's own estimate rather than the baseline.
    RequestContext ctx;
    ctx.current = ParamPoint{5, 4};
    prefs = {{5, 4}, SoundRepresentation::Default, false};
    CHECK(is_identity(build_request(thunder(), jamie_space(), prefs, meta(), ctx)));
}

TEST_CASE("build_request rejects what must not be transformed") {
    ViewerPrefs prefs{{6, 5}, SoundRepresentation::Default, false};
    auto locked = thunder();
    locked.locked = true;
    CHECK(code_of([&] { build_request(locked, jamie_space(), prefs, meta()); }) == ErrorCode::LockedCue);
    auto speech = thunder();
    speech.kind = CueKind::Speech;
    speech.category.reset();
    speech.text = "Come inside, Bella!";
    CHECK(code_of([&] { build_request(speech, jamie_space(), prefs, meta()); }) == ErrorCode::NotNsi);
    prefs.target = {9, 5};
    CHECK(code_of([&] { build_request(thunder(), jamie_space(), prefs, meta()); }) ==
          ErrorCode::OutOfAnchorBounds);
    prefs = {{6, 5}, SoundRepresentation::Default, true};
    CHECK(code_of([&] { build_request(thunder(), jamie_space(), prefs, VideoMetadata{"t", "", ""}); }) ==
          ErrorCode::ValidationFailed);
}

TEST_CASE("representation wire names") {
    for (auto m : {SoundRepresentation::Default, SoundRepresentation::SourceFocused, SoundRepresentation::Onomatopoeia,
                   SoundRepresentation::SensoryQuality}) {
        CHECK(parse_representation(to_string(m)) == m);
    }
    CHECK(to_string(SoundRepresentation::SensoryQuality) == "sensory_quality");
    CHECK(display_name(SoundRepresentation::SensoryQuality) == "Sensory Quality-focused");
    CHECK_FALSE(parse_representation("Sensory").has_value());
}
