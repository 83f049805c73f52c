#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "captune/chat_backend.hpp"
#include "captune/http_server.hpp"
#include "captune/mock_backend.hpp"
#include "captune/service.hpp"
#include "test_support.hpp"

#include <httplib.h>

#include <thread>

using namespace captune;
using json = nlohmann::json;
using doctest::Approx;
using test::code_of;
using test::error_of;

namespace {

std::shared_ptr<Backend> replay_backend() {
    return std::make_shared<ChatCompletionBackend>(std::make_unique<ReplayTransport>(test::fixtures() / "replay/bella"));
}

CreateProjectInput bella_input() {
    CreateProjectInput in;
    in.srt = test::read(test::fixtures() / "srt/01_bella.srt");
    in.source_name = "01_bella.srt";
    in.metadata = {"Bella", "animation", "A kitten waits out a storm."};
    return in;
}

ProjectConfig jamie() { return load_config(test::read(test::fixtures() / "projects/jamie.captune.json")); }

ParamPoint pt(const json& j) { return {j.at("detail").get<double>(), j.at("expressiveness").get<double>()}; }

PrefsUpdate cell(double d, double e) {
    PrefsUpdate u;
    u.cell = ParamPoint{d, e};
    return u;
}

} // namespace

TEST_CASE("calibration from recorded estimates gives the (3,2) baseline") {
    Service svc(replay_backend());
    const auto p = svc.create_project(bella_input());
    CHECK(p["id"] == "prj_000001");
    CHECK(p["nsi_count"] == 9);
    CHECK(p["warnings"].empty());
    const auto cal = svc.calibrate("prj_000001");
    CHECK(pt(cal["baseline"]) == ParamPoint{3, 2});
    CHECK(cal["estimates"].size() == 9);
    CHECK(pt(cal["estimates"]["10"]) == ParamPoint{4, 3});
    const auto proj = svc.get_project("prj_000001");
    CHECK(pt(proj["baseline"]) == ParamPoint{3, 2});
    CHECK(proj["cue_estimates"].count("4") == 0); // equal to the baseline
    CHECK(proj["cue_estimates"].count("10") == 1);

    CreateProjectInput speech;
    speech.srt = test::read(test::fixtures() / "srt/08_speech_only.srt");
    const std::string sid = svc.create_project(speech)["id"];
    CHECK(code_of([&] { svc.calibrate(sid); }) == ErrorCode::NoNsiCues);
    CHECK(code_of([&] { svc.calibrate("prj_999999"); }) == ErrorCode::NotFound);
}

TEST_CASE("mock calibration is deterministic") {
    Service a(std::make_shared<MockBackend>()), b(std::make_shared<MockBackend>());
    const std::string ida = a.create_project(bella_input())["id"];
    const std::string idb = b.create_project(bella_input())["id"];
    CHECK(a.calibrate(ida) == b.calibrate(idb));
    CHECK(a.calibrate(ida) == a.calibrate(ida));
}

TEST_CASE("anchors") {
    Service svc(replay_backend());
    const std::string id = svc.create_project(bella_input())["id"];
    CHECK(code_of([&] { svc.set_anchors(id, {2, 2}, {8, 7}); }) == ErrorCode::NotCalibrated);
    CHECK(code_of([&] { svc.export_project(id); }) == ErrorCode::AnchorsNotSet);
    svc.calibrate(id);
    CHECK(code_of([&] { svc.set_anchors(id, {8, 7}, {2, 2}); }) == ErrorCode::InvalidAnchorOrder);
    CHECK(code_of([&] { svc.set_anchors(id, {4, 2}, {8, 7}); }) == ErrorCode::InvalidAnchorOrder); // baseline outside
    CHECK(code_of([&] { svc.set_anchors(id, {2, 2}, {8, 7}, {{2, AnchorTexts{"[x]", std::nullopt}}}); }) ==
          ErrorCode::NotNsi);
    CHECK(code_of([&] { svc.set_anchors(id, {2, 2}, {8, 7}, {{42, AnchorTexts{"[x]", std::nullopt}}}); }) ==
          ErrorCode::NotFound);
    const auto r = svc.set_anchors(id, {2, 2}, {8, 7}, {{4, AnchorTexts{"[Thunder]", std::nullopt}}});
    CHECK(pt(r["space"]["anchors"]["lower"]) == ParamPoint{2, 2});
    CHECK(r["anchor_preview_texts"]["4"]["lower_text"] == "[Thunder]");
    const ProjectConfig c = svc.export_project(id);
    CHECK(c.space->baseline() == ParamPoint{3, 2});
    CHECK(load_config(export_config(c)) == c);
    // Recalibrating starts the space over.
    svc.calibrate(id);
    CHECK(code_of([&] { svc.export_project(id); }) == ErrorCode::AnchorsNotSet);
}

TEST_CASE("preview follows the slider walk-through with recalibration") {
    Service svc(replay_backend());
    const std::string id = svc.create_project(bella_input())["id"];
    CHECK(code_of([&] { svc.preview(id, {4, 0, 0, {}}); }) == ErrorCode::NotCalibrated);
    svc.calibrate(id);

    // Centered sliders reproduce the original without calling the backend.
    auto r = svc.preview(id, {4, 0, 0, {}});
    CHECK(r["text"] == "[Loud thunder sound]");
    CHECK(r["backend_called"] == false);
    CHECK(pt(r["values"]) == ParamPoint{3, 2});

    // Expressiveness up to slider 5: f(5) = 6 on the 2-centered map.
    r = svc.preview(id, {4, 0, 5, {}});
    CHECK(pt(r["values"]).expressiveness == Approx(6.0).epsilon(1e-9));
    CHECK(r["text"] == "[Thunder crashes violently]");
    CHECK(r["recalibration"].is_null());

    // Detail up to slider 6: f(6) = 7.2; the richer text reads at
    // expressiveness 8, so slider 5 is pinned there.
    r = svc.preview(id, {4, 6, 5, {"upper"}});
    CHECK(pt(r["values"]).detail == Approx(7.2).epsilon(1e-9));
    CHECK(pt(r["values"]).expressiveness == Approx(6.0).epsilon(1e-9));
    CHECK(r["text"] == "[Deep, rumbling thunder crashes violently, echoing across the sky]");
    CHECK(r["recalibrated_expr"] == 8);
    CHECK(r["recalibration"]["dimension"] == "expressiveness");
    CHECK(r["recalibration"]["slider"] == 5);
    const auto& ce = r["calibration"]["expressiveness"];
    CHECK(ce["s_ref"] == 5);
    CHECK(ce["v_ref"] == 8);
    CHECK(ce["v_min"] == 1);
    CHECK(ce["v_max"] == 10);

    const auto proj = svc.get_project(id);
    CHECK(proj["anchor_preview_texts"]["4"]["upper_text"] ==
          "[Deep, rumbling thunder crashes violently, echoing across the sky]");

    CHECK(code_of([&] { svc.preview(id, {4, 11, 0, {}}); }) == ErrorCode::SliderOutOfRange);
    CHECK(code_of([&] { svc.preview(id, {2, 0, 0, {}}); }) == ErrorCode::NotNsi);
    CHECK(code_of([&] { svc.preview(id, {77, 0, 0, {}}); }) == ErrorCode::NotFound);
    CHECK(code_of([&] { svc.preview(id, {4, 0, 0, {"middle"}}); }) == ErrorCode::BadRequest);
    svc.edit_cue(id, 4, std::nullopt, true);
    CHECK(code_of([&] { svc.preview(id, {4, 0, 0, {}}); }) == ErrorCode::LockedCue);
}

TEST_CASE("editing and locking cues") {
    Service svc(std::make_shared<MockBackend>());
    const std::string id = svc.create_project(bella_input())["id"];
    svc.calibrate(id);
    CHECK(code_of([&] { svc.edit_cue(id, 2, std::string("[x]"), std::nullopt); }) == ErrorCode::NotNsi);
    CHECK(code_of([&] { svc.edit_cue(id, 4, std::string("Thunder"), std::nullopt); }) == ErrorCode::NotNsi);
    CHECK(code_of([&] { svc.edit_cue(id, 40, std::nullopt, true); }) == ErrorCode::NotFound);

    svc.set_anchors(id, {2, 1}, {8, 7}, {{4, AnchorTexts{"[Thunder]", std::nullopt}}});
    auto cue = svc.edit_cue(id, 4, std::string("  [Thunder rumbles in the distance]  "), std::nullopt);
    CHECK(cue["text"] == "[Thunder rumbles in the distance]");
    CHECK(cue["category"] == "EnvironmentSound");
    auto proj = svc.get_project(id);
    CHECK(proj["anchor_preview_texts"].count("4") == 0);
    // thunder, rumbles, distance: three content words read as detail 4.
    CHECK(pt(proj["cue_estimates"]["4"]) == ParamPoint{4, 1});

    cue = svc.edit_cue(id, 9, std::nullopt, true);
    CHECK(cue["locked"] == true);
    const ProjectConfig c = svc.export_project(id);
    CHECK(c.original_track.find(9)->locked);
    CHECK(c.original_track.find(4)->text == "[Thunder rumbles in the distance]");
}

TEST_CASE("sessions and prefs") {
    Service svc(std::make_shared<MockBackend>());
    CHECK(code_of([&] { svc.create_session(ProjectConfig{}); }) == ErrorCode::AnchorsNotSet);
    const auto s = svc.create_session(jamie());
    const std::string id = s["id"];
    CHECK(id == "ses_000001");
    CHECK(pt(s["prefs"]["target"]) == ParamPoint{3, 2});
    CHECK(s["prefs"]["representation"] == "default");
    CHECK(s["prefs"]["genre_aligned"] == false);

    auto r = svc.set_prefs(id, cell(6, 5));
    CHECK(pt(r["prefs"]["target"]) == ParamPoint{6, 5});
    const auto e = error_of([&] { svc.set_prefs(id, cell(9, 9)); });
    CHECK(e.code() == ErrorCode::DisabledCell);
    CHECK(pt(e.details()["lower"]) == ParamPoint{2, 2});
    CHECK(pt(e.details()["upper"]) == ParamPoint{8, 7});
    CHECK(pt(svc.get_session(id)["prefs"]["target"]) == ParamPoint{6, 5}); // unchanged by the rejection
    CHECK(code_of([&] { svc.set_prefs(id, cell(5.5, 5)); }) == ErrorCode::BadRequest);
    CHECK(code_of([&] { svc.set_prefs(id, cell(0, 5)); }) == ErrorCode::BadRequest);

    PrefsUpdate t;
    t.target = ParamPoint{9.5, 1};
    r = svc.set_prefs(id, t);
    CHECK(pt(r["prefs"]["target"]) == ParamPoint{8, 2});
    t.target = ParamPoint{10.5, 1};
    CHECK(code_of([&] { svc.set_prefs(id, t); }) == ErrorCode::BadRequest);
    t.cell = ParamPoint{3, 3};
    t.target = ParamPoint{3, 3};
    CHECK(code_of([&] { svc.set_prefs(id, t); }) == ErrorCode::BadRequest);

    PrefsUpdate mode;
    mode.representation = SoundRepresentation::Onomatopoeia;
    r = svc.set_prefs(id, mode);
    CHECK(r["prefs"]["representation"] == "onomatopoeia");
    CHECK(pt(r["prefs"]["target"]) == ParamPoint{8, 2});
    PrefsUpdate genre;
    genre.genre_aligned = true;
    CHECK(svc.set_prefs(id, genre)["prefs"]["genre_aligned"] == true);

    auto bare = jamie();
    bare.metadata.genre.clear();
    const std::string id2 = svc.create_session(bare)["id"];
    CHECK(code_of([&] { svc.set_prefs(id2, genre); }) == ErrorCode::ValidationFailed);
    CHECK(code_of([&] { svc.get_session("ses_424242"); }) == ErrorCode::NotFound);
}

TEST_CASE("chat applies the two example requests") {
    Service svc(std::make_shared<MockBackend>());
    const std::string id = svc.create_session(jamie())["id"];
    svc.set_prefs(id, cell(6, 5));

    auto r = svc.chat(id, "I want to know what is making the sounds, but keep it brief");
    CHECK(r["intent"]["detail_delta"] == -2);
    CHECK(r["intent"]["representation"] == "source_focused");
    CHECK(pt(r["prefs"]["target"]) == ParamPoint{4, 5});
    CHECK(r["prefs"]["representation"] == "source_focused");
    CHECK(r["clamped"] == false);
    CHECK(r["reply"] == "I've decreased the Level of Detail (now at 4) and changed the sound representation mode to "
                        "Source-focused. Your preferences have been updated.");

    r = svc.chat(id, "I'd like a better sense of what the storm sounds like");
    CHECK(pt(r["prefs"]["target"]) == ParamPoint{6, 5});
    CHECK(r["prefs"]["representation"] == "sensory_quality");
    CHECK(r["reply"] == "I've increased the Level of Detail (now at 6) and changed the sound representation mode to "
                        "Sensory Quality-focused. Your preferences have been updated.");

    // Clamped at the creator's limits.
    svc.set_prefs(id, cell(7, 5));
    r = svc.chat(id, "I'd like a better sense of what the storm sounds like");
    CHECK(pt(r["prefs"]["target"]) == ParamPoint{8, 5});
    CHECK(r["clamped"] == true);
    CHECK(std::string(r["reply"]).find("the highest the creator allows") != std::string::npos);
    r = svc.chat(id, "I'd like a better sense of what the storm sounds like");
    CHECK(r["reply"] == "The Level of Detail is already at the creator's upper limit (8). The sound representation "
                        "mode is already Sensory Quality-focused. Your preferences are unchanged.");

    r = svc.chat(id, "hello");
    CHECK(r["intent"]["recognized"] == false);
    CHECK(pt(r["prefs"]["target"]) == ParamPoint{8, 5});
    CHECK_FALSE(std::string(r["reply"]).empty());
}

TEST_CASE("viewer captions from recorded transformations") {
    Service svc(replay_backend());
    const std::string id = svc.create_session(jamie())["id"];
    svc.set_prefs(id, cell(6, 5));
    auto r = svc.get_captions(id, Millis(9000), Millis(11000));
    REQUIRE(r["cues"].size() == 1);
    CHECK(r["cues"][0]["index"] == 4);
    CHECK(r["cues"][0]["text"] == "[Rumbling thunder crashes violently]");
    CHECK(r["cues"][0]["transformed"] == true);
    // A second pass is served from the session cache.
    CHECK(svc.get_captions(id, Millis(9000), Millis(11000)) == r);
    CHECK(svc.backend_transform_calls() == 1);

    // Viewer utterances resolve through the recorded interpreter as well.
    const auto c = svc.chat(id, "I want to know what is making the sounds, but keep it brief");
    CHECK(pt(c["prefs"]["target"]) == ParamPoint{4, 5});
    CHECK(c["prefs"]["representation"] == "source_focused");
}

TEST_CASE("captions are consistent and cached") {
    Service svc(std::make_shared<MockBackend>());
    auto config = jamie();
    // Two cues with the same text must come out the same.
    config.original_track.find(8)->text = "[Loud thunder sound]";
    config.original_track.find(8)->category = NsiCategory::EnvironmentSound;
    const std::string id = svc.create_session(config)["id"];
    svc.set_prefs(id, cell(6, 5));

    const auto first = svc.get_captions(id, std::nullopt, std::nullopt);
    REQUIRE(first["cues"].size() == 12);
    CHECK(first["cues"][3]["text"] == first["cues"][7]["text"]);
    CHECK(first["cues"][3]["transformed"] == true);
    CHECK(first["cues"][1]["transformed"] == false); // speech
    auto m = svc.metrics();
    CHECK(m["cache"]["misses"] == 9);
    CHECK(m["cache"]["hits"] == 0);

    const auto second = svc.get_captions(id, std::nullopt, std::nullopt);
    CHECK(second.dump() == first.dump());
    m = svc.metrics();
    CHECK(m["sessions"][id]["hits"] == 9);
    CHECK(m["sessions"][id]["misses"] == 9);
    CHECK(m["cache"]["hit_rate"].get<double>() == Approx(0.5));
    CHECK(m["backend"]["kind"] == "mock");

    // Windows: cues overlapping [from, to).
    CHECK(svc.get_captions(id, Millis(0), Millis(500))["cues"].empty());
    CHECK(svc.get_captions(id, Millis(3500), Millis(4000))["cues"].empty());
    CHECK(svc.get_captions(id, Millis(3499), Millis(4001))["cues"].size() == 2);
    CHECK(svc.get_captions(id, Millis(999999), std::nullopt)["cues"].empty());
    CHECK(code_of([&] { svc.get_captions(id, Millis(10), Millis(5)); }) == ErrorCode::BadRequest);

    // The baseline cell with defaults is the original track.
    svc.set_prefs(id, cell(3, 2));
    for (const auto& c : svc.get_captions(id, std::nullopt, std::nullopt)["cues"]) CHECK(c["transformed"] == false);
}

TEST_CASE("locked cues survive every transformation") {
    MockBackend mock;
    auto config = jamie();
    for (int i : {1, 4, 9}) config.original_track.find(i)->locked = true;
    for (auto mode : {SoundRepresentation::Default, SoundRepresentation::SensoryQuality}) {
        for (int d = 2; d <= 8; d += 3) {
            const ViewerPrefs prefs{{double(d), 7}, mode, true};
            const auto out = transform_track(config, prefs, mock);
            for (std::size_t k = 0; k < out.cues.size(); ++k) {
                const auto& orig = config.original_track.cues[k];
                if (orig.locked || !orig.is_nsi()) CHECK(out.cues[k].text == orig.text);
            }
        }
    }
    CHECK(code_of([&] { transform_track(config, ViewerPrefs{{1, 1}}, mock); }) == ErrorCode::DisabledCell);
}

TEST_CASE("state persists across restarts") {
    test::TempDir dir("captune-store");
    std::string pid, sid;
    json project_before, session_before;
    {
        Service svc(std::make_shared<MockBackend>(), dir.path());
        pid = svc.create_project(bella_input())["id"];
        svc.calibrate(pid);
        svc.set_anchors(pid, {2, 1}, {8, 7});
        svc.edit_cue(pid, 9, std::nullopt, true);
        sid = svc.create_session(svc.export_project(pid))["id"];
        svc.set_prefs(sid, cell(6, 5));
        project_before = svc.get_project(pid);
        session_before = svc.get_session(sid);
    }
    CHECK(std::filesystem::exists(dir.path() / "store.jsonl"));
    Service svc(std::make_shared<MockBackend>(), dir.path());
    CHECK(svc.get_project(pid) == project_before);
    CHECK(svc.get_session(sid) == session_before);
    // New ids continue after the replayed ones.
    CHECK(svc.create_project(bella_input())["id"] == "prj_000003");
}

TEST_CASE("creating projects") {
    Service svc(std::make_shared<MockBackend>());
    auto in = bella_input();
    in.descriptions = {{4, "A storm over a farmhouse."}, {40, "nothing"}};
    CHECK(code_of([&] { svc.create_project(in); }) == ErrorCode::ValidationFailed);
    in.lenient = true;
    const auto p = svc.create_project(in);
    CHECK(p["warnings"].size() == 1);
    CHECK(p["context_descriptions"].size() == 1);

    CreateProjectInput empty;
    CHECK(code_of([&] { svc.create_project(empty); }) == ErrorCode::EmptyFile);
    CreateProjectInput bad;
    bad.srt = test::read(test::fixtures() / "srt_malformed/index_backwards.srt");
    CHECK(code_of([&] { svc.create_project(bad); }) == ErrorCode::NonMonotonicCue);
    bad.lenient = true;
    CHECK(svc.create_project(bad)["warnings"].size() >= 1);
}

// ─── HTTP ────────────────────────────────────────────────────────────────────

namespace {

struct LiveServer {
    explicit LiveServer(std::shared_ptr<Backend> backend) : svc(std::move(backend)), http(svc, "*") {
        port = http.bind("127.0.0.1", 0);
        REQUIRE(port > 0);
        thread = std::thread([this] { http.serve(); });
        http.wait_until_ready();
    }
    ~LiveServer() {
        http.stop();
        thread.join();
    }
    httplib::Client client() const { return httplib::Client("127.0.0.1", port); }

    Service svc;
    HttpServer http;
    int port = 0;
    std::thread thread;
};

json body(const httplib::Result& r) {
    REQUIRE(r);
    return json::parse(r->body);
}

} // namespace

TEST_CASE("http status mapping") {
    CHECK(http_status(ErrorCode::BadRequest) == 400);
    CHECK(http_status(ErrorCode::NotFound) == 404);
    CHECK(http_status(ErrorCode::LockedCue) == 409);
    CHECK(http_status(ErrorCode::NotCalibrated) == 409);
    CHECK(http_status(ErrorCode::AnchorsNotSet) == 409);
    CHECK(http_status(ErrorCode::MalformedResponse) == 502);
    CHECK(http_status(ErrorCode::BackendUnavailable) == 503);
    CHECK(http_status(ErrorCode::DisabledCell) == 422);
    CHECK(http_status(ErrorCode::ValidationFailed) == 422);
}

TEST_CASE("the full workflow over HTTP") {
    LiveServer server(std::make_shared<MockBackend>());
    auto cli = server.client();
    const std::string json_type = "application/json";

    auto r = cli.Get("/healthz");
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(body(r)["backend"] == "mock");
    CHECK(r->get_header_value("Access-Control-Allow-Origin") == "*");

    httplib::Headers origin{{"Origin", "http://localhost:5173"}, {"Access-Control-Request-Method", "PUT"}};
    r = cli.Options("/sessions/x/prefs", origin);
    REQUIRE(r);
    CHECK(r->status == 204);
    CHECK(r->get_header_value("Access-Control-Allow-Methods").find("PATCH") != std::string::npos);

    json create = {{"srt", test::read(test::fixtures() / "srt/01_bella.srt")},
                   {"source_name", "01_bella.srt"},
                   {"metadata", {{"title", "Bella"}, {"genre", "animation"}, {"synopsis", "Storm."}}},
                   {"descriptions", {{"4", "A storm over a farmhouse."}}}};
    r = cli.Post("/projects", create.dump(), json_type);
    REQUIRE(r);
    CHECK(r->status == 201);
    const std::string pid = body(r)["id"];

    r = cli.Put("/projects/" + pid + "/anchors", R"({"lower": [2, 1], "upper": [8, 7]})", json_type);
    CHECK(r->status == 409);
    CHECK(body(r)["code"] == "NotCalibrated");

    r = cli.Post("/projects/" + pid + "/calibrate", "", json_type);
    CHECK(r->status == 200);
    CHECK(pt(body(r)["baseline"]) == ParamPoint{3, 1});

    r = cli.Put("/projects/" + pid + "/anchors", R"({"lower": [8, 7], "upper": [2, 1]})", json_type);
    CHECK(r->status == 422);
    CHECK(body(r)["code"] == "InvalidAnchorOrder");
    r = cli.Put("/projects/" + pid + "/anchors",
                R"({"lower": {"detail": 2, "expressiveness": 1}, "upper": [8, 7]})", json_type);
    CHECK(r->status == 200);

    r = cli.Post("/projects/" + pid + "/preview", R"({"cue_index": 4, "slider_detail": 4, "slider_expr": 3})",
                 json_type);
    CHECK(r->status == 200);
    CHECK(body(r)["backend_called"] == true);
    r = cli.Post("/projects/" + pid + "/preview", R"({"cue_index": 4})", json_type);
    CHECK(r->status == 400);
    CHECK(body(r)["details"]["field"] == "slider_detail");

    r = cli.Patch("/projects/" + pid + "/cues/9", R"({"locked": true})", json_type);
    CHECK(r->status == 200);
    r = cli.Post("/projects/" + pid + "/preview", R"({"cue_index": 9, "slider_detail": 1, "slider_expr": 0})",
                 json_type);
    CHECK(r->status == 409);
    CHECK(body(r)["code"] == "LockedCue");
    r = cli.Patch("/projects/" + pid + "/cues/2", R"({"text": "[Cough]"})", json_type);
    CHECK(r->status == 422);
    CHECK(body(r)["code"] == "NotNsi");

    r = cli.Get("/projects/" + pid + "/export");
    CHECK(r->status == 200);
    CHECK(r->body == export_config(server.svc.export_project(pid)));
    const auto exported = load_config(r->body);

    r = cli.Post("/sessions", json{{"project_id", pid}}.dump(), json_type);
    CHECK(r->status == 201);
    const std::string sid = body(r)["id"];
    r = cli.Post("/sessions", json{{"config", config_to_json(exported)}}.dump(), json_type);
    CHECK(r->status == 201);
    r = cli.Post("/sessions", config_to_json(exported).dump(), json_type);
    CHECK(r->status == 201);

    r = cli.Put("/sessions/" + sid + "/prefs", R"({"cell": [6, 5]})", json_type);
    CHECK(r->status == 200);
    r = cli.Put("/sessions/" + sid + "/prefs", R"({"cell": [9, 9]})", json_type);
    CHECK(r->status == 422);
    const auto err = body(r);
    CHECK(err["code"] == "DisabledCell");
    CHECK(err["message"].is_string());
    CHECK(pt(err["details"]["upper"]) == ParamPoint{8, 7});
    r = cli.Put("/sessions/" + sid + "/prefs", R"({"representation": "loud"})", json_type);
    CHECK(r->status == 400);

    r = cli.Get("/sessions/" + sid + "/captions?from_ms=9000&to_ms=11000");
    CHECK(r->status == 200);
    const auto caps = body(r);
    REQUIRE(caps["cues"].size() == 1);
    CHECK(caps["cues"][0]["transformed"] == true);
    r = cli.Get("/sessions/" + sid + "/captions?from_ms=9000&to_ms=11000");
    CHECK(body(r) == caps);
    r = cli.Get("/sessions/" + sid + "/captions?from_ms=-4");
    CHECK(r->status == 400);

    r = cli.Post("/sessions/" + sid + "/chat",
                 R"({"utterance": "I want to know what is making the sounds, but keep it brief"})", json_type);
    CHECK(r->status == 200);
    CHECK(pt(body(r)["prefs"]["target"]) == ParamPoint{4, 5});

    r = cli.Get("/metrics");
    CHECK(body(r)["cache"]["hits"] == 1);

    r = cli.Get("/projects/prj_999999");
    CHECK(r->status == 404);
    CHECK(body(r)["code"] == "NotFound");
    r = cli.Post("/projects", "{not json", json_type);
    CHECK(r->status == 400);
    r = cli.Post("/projects", R"({"srt": ""})", json_type);
    CHECK(r->status == 422);
    CHECK(body(r)["code"] == "EmptyFile");
}

TEST_CASE("backend failures map to 502 and 503") {
    auto malformed = std::make_shared<ChatCompletionBackend>(std::make_unique<ReplayTransport>(std::vector<json>{
        {{"capability", "estimate"}, {"response", {{"content", "three"}}}}}));
    LiveServer server(malformed);
    auto cli = server.client();
    auto r = cli.Post("/projects", json{{"srt", test::read(test::fixtures() / "srt/01_bella.srt")}}.dump(),
                      "application/json");
    const std::string pid = body(r)["id"];
    r = cli.Post("/projects/" + pid + "/calibrate", "", "application/json");
    CHECK(r->status == 502);
    CHECK(body(r)["code"] == "MalformedResponse");
    CHECK(body(r)["details"]["raw"] == "three");

    LiveServer offline(replay_backend());
    auto c2 = offline.client();
    r = c2.Post("/projects", json{{"srt", test::read(test::fixtures() / "srt/02_multiline.srt")}}.dump(),
                "application/json");
    const std::string pid2 = body(r)["id"];
    r = c2.Post("/projects/" + pid2 + "/calibrate", "", "application/json");
    CHECK(r->status == 503);
    CHECK(body(r)["code"] == "BackendUnavailable");
}
