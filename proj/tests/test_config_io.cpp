#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "captune/config_io.hpp"
#include "test_support.hpp"

using namespace captune;
using json = nlohmann::json;
using test::code_of;
using test::error_of;

namespace {

std::vector<std::filesystem::path> config_fixtures() {
    return {test::fixtures() / "projects/jamie.captune.json", test::fixtures() / "projects/bella_mock.captune.json"};
}

json jamie() { return test::read_json(test::fixtures() / "projects/jamie.captune.json"); }

// Path reported for a mutated Jamie config.
std::string rejected_path(const std::function<void(json&)>& mutate, ErrorCode expected = ErrorCode::ValidationFailed) {
    json doc = jamie();
    mutate(doc);
    const auto e = error_of([&] { load_config(doc.dump()); });
    CHECK(e.code() == expected);
    return e.details().value("path", "");
}

} // namespace

TEST_CASE("fixture configs round-trip structurally and byte for byte") {
    for (const auto& path : config_fixtures()) {
        CAPTURE(path);
        const std::string text = test::read(path);
        const ProjectConfig c = load_config(text);
        CHECK(c.space.has_value());
        const std::string exported = export_config(c);
        CHECK(exported == text);
        CHECK(load_config(exported) == c);
        CHECK(export_config(load_config(exported)) == exported);
    }
}

TEST_CASE("jamie config contents") {
    const auto c = load_config(test::read(test::fixtures() / "projects/jamie.captune.json"));
    CHECK(c.space->baseline() == ParamPoint{3, 2});
    CHECK(c.space->lower_anchor() == ParamPoint{2, 2});
    CHECK(c.space->upper_anchor() == ParamPoint{8, 7});
    CHECK(c.anchor_preview_texts.at(4).lower_text == "[Thunder]");
    CHECK(c.original_track.cues.size() == 12);
    CHECK(c.schema_version == "1");
    CHECK(c.prompt_version == std::string(kPromptVersion));
}

TEST_CASE("programmatic config round-trips, including non-default calibrations") {
    ProjectConfig c;
    CaptionCue a;
    a.index = 1;
    a.start = std::chrono::milliseconds(0);
    a.end = std::chrono::milliseconds(1500);
    a.text = "[Soft piano music]";
    a.kind = CueKind::Nsi;
    a.category = NsiCategory::Music;
    CaptionCue b;
    b.index = 2;
    b.start = std::chrono::milliseconds(1500);
    b.end = std::chrono::milliseconds(4200);
    b.text = "Who's there?\nBella?";
    CaptionCue d = a;
    d.index = 3;
    d.start = std::chrono::milliseconds(5000);
    d.end = std::chrono::milliseconds(6000);
    d.text = "(door creaks)";
    d.category = NsiCategory::EnvironmentSound;
    d.locked = true;
    c.original_track.cues = {a, b, d};
    c.original_track.source_name = "unit.srt";
    TransformSpace s({3.333333333, 2}, {1, 1}, {9.5, 8});
    DimensionCalibration cd = DimensionCalibration::centered(3.333333333);
    cd = recalibrate(cd, 4.25, 7.125);
    s.set_calibrations(cd, DimensionCalibration::centered(2));
    c.space = s;
    c.anchor_preview_texts[1] = {"[Music]", std::nullopt};
    c.context_descriptions[2] = "A dark hallway.";
    c.metadata = {"Unit", "drama", "Tests."};
    c.cue_estimates[3] = {5, 4};

    const std::string text = export_config(c);
    const ProjectConfig back = load_config(text);
    CHECK(back.original_track == c.original_track);
    CHECK(back.anchor_preview_texts == c.anchor_preview_texts);
    CHECK(back.context_descriptions == c.context_descriptions);
    CHECK(back.cue_estimates == c.cue_estimates);
    CHECK(back.metadata == c.metadata);
    // Values are stored to six decimals, so structural equality holds after
    // one export.
    CHECK(back.space->baseline().detail == doctest::Approx(3.333333));
    CHECK(load_config(export_config(back)) == back);
    CHECK(export_config(back) == text);
    CHECK(text.back() == '\n');
    CHECK(round6(0.1234565) == doctest::Approx(0.123457));
}

TEST_CASE("export needs anchors") {
    ProjectConfig c;
    CHECK(code_of([&] { export_config(c); }) == ErrorCode::AnchorsNotSet);
    json doc = jamie();
    doc.erase("space");
    CHECK(code_of([&] { load_config(doc.dump()); }) == ErrorCode::ValidationFailed);
}

TEST_CASE("invalid spaces are rejected with their paths") {
    // upper below lower
    CHECK(rejected_path([](json& d) {
              d["space"]["anchors"]["lower"] = {{"detail", 8}, {"expressiveness", 7}};
              d["space"]["anchors"]["upper"] = {{"detail", 2}, {"expressiveness", 2}};
          }) == "space.anchors");
    CHECK(rejected_path([](json& d) { d["space"]["anchors"]["upper"]["expressiveness"] = 2; }) == "space.anchors");
    // baseline outside the anchors
    CHECK(rejected_path([](json& d) { d["space"]["baseline"]["detail"] = 9; }) == "space.baseline");
    CHECK(rejected_path([](json& d) { d["space"]["baseline"]["expressiveness"] = 1; }) == "space.baseline");
    CHECK(rejected_path([](json& d) { d["space"]["anchors"]["upper"]["detail"] = 11; }).rfind("space.anchors", 0) == 0);
    CHECK(rejected_path([](json& d) { d["space"]["calibration"]["detail"]["s_ref"] = 10; })
              .rfind("space.calibration.detail", 0) == 0);
    CHECK(rejected_path([](json& d) { d["space"]["calibration"]["detail"]["v_ref"] = "3"; })
              .rfind("space.calibration.detail", 0) == 0);
}

TEST_CASE("invalid tracks and maps are rejected") {
    CHECK(rejected_path([](json& d) { d["original_track"]["cues"][1]["index"] = 1; }).rfind("original_track.cues", 0) == 0);
    CHECK(rejected_path([](json& d) { d["original_track"]["cues"][0]["end_ms"] = 0; }).rfind("original_track.cues[0]", 0) == 0);
    CHECK(rejected_path([](json& d) { d["original_track"]["cues"][0]["kind"] = "nsi"; }) == "original_track.cues[0].kind");
    CHECK(rejected_path([](json& d) { d["original_track"]["cues"][0]["category"] = "Noise"; }) ==
          "original_track.cues[0].category");
    CHECK(rejected_path([](json& d) { d["original_track"]["cues"][0]["text"] = "not wrapped"; }).rfind("original_track.cues[0]", 0) == 0);
    // Cue 4 is NSI; cue 2 is speech.
    CHECK_NOTHROW([] { json d = jamie(); d["anchor_preview_texts"]["5"] = {{"lower_text", "[x]"}}; load_config(d.dump()); }());
    CHECK(rejected_path([](json& d) { d["anchor_preview_texts"]["2"] = {{"lower_text", "[x]"}}; })
              .rfind("anchor_preview_texts", 0) == 0);
    CHECK(rejected_path([](json& d) { d["anchor_preview_texts"]["99"] = {{"lower_text", "[x]"}}; })
              .rfind("anchor_preview_texts", 0) == 0);
    CHECK(rejected_path([](json& d) { d["cue_estimates"]["2"] = {{"detail", 3}, {"expressiveness", 2}}; })
              .rfind("cue_estimates", 0) == 0);
    CHECK(rejected_path([](json& d) { d["context_descriptions"]["x"] = "?"; }).rfind("context_descriptions", 0) == 0);
    CHECK(rejected_path([](json& d) { d["metadata"] = "Bella"; }).rfind("metadata", 0) == 0);
    CHECK(rejected_path([](json& d) { d = json::array(); }) == "$");
}

TEST_CASE("schema version and parse errors") {
    CHECK(rejected_path([](json& d) { d["schema_version"] = "2"; }, ErrorCode::SchemaMismatch) == "schema_version");
    CHECK(rejected_path([](json& d) { d.erase("schema_version"); }, ErrorCode::SchemaMismatch) == "schema_version");

    const std::string text = test::read(test::fixtures() / "projects/jamie.captune.json");
    const std::string truncated = text.substr(0, text.size() / 2);
    const auto e = error_of([&] { load_config(truncated); });
    CHECK(e.code() == ErrorCode::ValidationFailed);
    CHECK(e.details().at("path") == "$");
    CHECK(e.details().at("line").get<int>() > 1);
    CHECK(e.details().at("column").get<int>() >= 1);
    CHECK(e.details().contains("byte"));
    const auto line_count = std::count(truncated.begin(), truncated.end(), '\n');
    CHECK(e.details().at("line").get<int>() >= line_count);

    CHECK(code_of([] { load_config(""); }) == ErrorCode::ValidationFailed);
}
