#include "captune/cli.hpp"

#include "captune/backend.hpp"
#include "captune/config_io.hpp"
#include "captune/error.hpp"
#include "captune/http_server.hpp"
#include "captune/log.hpp"
#include "captune/mock_backend.hpp"
#include "captune/service.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <csignal>
#include <fstream>
#include <sstream>

namespace captune::cli {

namespace {

using json = nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw captune::Error(ErrorCode::NotFound, "cannot read " + path, {{"path", path}});
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& data) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << data;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string truncate(std::string s, std::size_t n) {
    for (auto& c : s) {
        if (c == '\n') c = ' ';
    }
    if (s.size() > n) s = s.substr(0, n - 3) + "...";
    return s;
}

ParamPoint parse_point(const std::string& s, const char* flag) {
    const auto comma = s.find(',');
    try {
        if (comma != std::string::npos) {
            std::size_t used = 0;
            const double d = std::stod(s.substr(0, comma), &used);
            const double e = std::stod(s.substr(comma + 1), &used);
            return {d, e};
        }
    } catch (const std::exception&) {
    }
    throw captune::Error(ErrorCode::BadRequest, fmt::format("{} expects DETAIL,EXPRESSIVENESS", flag), {{"value", s}});
}

std::map<int, std::string> read_descriptions(const std::string& path) {
    if (path.empty()) return {};
    return SidecarDescriber::from_json(read_file(path)).entries();
}

struct BackendFlags {
    std::string kind = "mock";
    std::string fixtures;

    void add_to(CLI::App* app) {
        app->add_option("--backend", kind, "mock, live or replay")
            ->check(CLI::IsMember({"mock", "live", "replay"}))
            ->capture_default_str();
        app->add_option("--fixtures", fixtures, "Recorded chat responses for --backend replay (or live)");
    }

    std::shared_ptr<Backend> make() const {
        BackendOptions opts =
            BackendOptions::from_env(kind == "mock" ? BackendKind::DeterministicMock : BackendKind::LiveChatCompletion);
        if (kind == "replay" && fixtures.empty()) {
            throw captune::Error(ErrorCode::BadRequest, "--backend replay needs --fixtures");
        }
        if (!fixtures.empty() && kind != "mock") opts.replay_fixtures = fixtures;
        return make_backend(opts);
    }
};

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedResponse:
        case ErrorCode::DescriberUnavailable: return 1;
        default: return 2;
    }
}

std::atomic<HttpServer*> g_server{nullptr};

extern "C" void on_signal(int) {
    if (auto* s = g_server.load()) s->stop();
}

// ─── commands ────────────────────────────────────────────────────────────────

void cmd_inspect(const std::string& path, bool as_json, bool lenient, std::ostream& out, std::ostream& err) {
    ParseOptions opts;
    opts.lenient = lenient;
    opts.source_name = std::filesystem::path(path).filename().string();
    const ParseResult parsed = parse_srt_with_warnings(read_file(path), opts);
    for (const auto& w : parsed.warnings) err << fmt::format("warning: line {}: {}\n", w.line, w.message);

    if (as_json) {
        json cues = json::array();
        for (const auto& c : parsed.track.cues) cues.push_back(to_json(c));
        json warnings = json::array();
        for (const auto& w : parsed.warnings) warnings.push_back({{"line", w.line}, {"message", w.message}});
        out << json{{"source_name", parsed.track.source_name},
                    {"cues", cues},
                    {"nsi_count", parsed.track.nsi_count()},
                    {"warnings", warnings}}
                   .dump(2)
            << "\n";
        return;
    }
    out << fmt::format("{:>5}  {:<12}  {:<12}  {:<6}  {:<17}  {}\n", "#", "start", "end", "kind", "category", "text");
    for (const auto& c : parsed.track.cues) {
        out << fmt::format("{:>5}  {:<12}  {:<12}  {:<6}  {:<17}  {}\n", c.index, format_timestamp(c.start),
                           format_timestamp(c.end), c.is_nsi() ? "NSI" : "speech",
                           c.category ? std::string(to_string(*c.category)) : "-", truncate(c.text, 70));
    }
    out << fmt::format("{} cues, {} NSI\n", parsed.track.cues.size(), parsed.track.nsi_count());
}

void cmd_calibrate(const std::string& path, const std::string& descriptions, const BackendFlags& bf, bool as_json,
                   std::ostream& out) {
    Service service(bf.make());
    CreateProjectInput in;
    in.srt = read_file(path);
    in.source_name = std::filesystem::path(path).filename().string();
    in.descriptions = read_descriptions(descriptions);
    const std::string id = service.create_project(in)["id"];
    const json result = service.calibrate(id);
    if (as_json) {
        out << result.dump(2) << "\n";
        return;
    }
    const auto& b = result["baseline"];
    out << fmt::format("baseline: Level of Detail {}, Expressiveness {}\n", format_value(b["detail"]),
                       format_value(b["expressiveness"]));
    std::vector<std::pair<int, json>> rows;
    for (const auto& [k, e] : result["estimates"].items()) rows.emplace_back(std::stoi(k), e);
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [index, e] : rows) {
        out << fmt::format("  cue {:>4}: detail {}, expressiveness {}\n", index, format_value(e["detail"]),
                           format_value(e["expressiveness"]));
    }
}

struct InitFlags {
    std::string srt, output, lower, upper, descriptions, title, genre, synopsis;
};

void cmd_init(const InitFlags& f, const BackendFlags& bf, std::ostream& out) {
    Service service(bf.make());
    CreateProjectInput in;
    in.srt = read_file(f.srt);
    in.source_name = std::filesystem::path(f.srt).filename().string();
    in.descriptions = read_descriptions(f.descriptions);
    in.metadata = {f.title, f.genre, f.synopsis};
    const std::string id = service.create_project(in)["id"];
    service.calibrate(id);
    service.set_anchors(id, parse_point(f.lower, "--lower"), parse_point(f.upper, "--upper"));
    const std::string doc = export_config(service.export_project(id));
    if (f.output.empty() || f.output == "-") {
        out << doc;
    } else {
        write_file(f.output, doc);
        out << "wrote " << f.output << "\n";
    }
}

void cmd_anchors(const std::string& config_path, const std::string& lower, const std::string& upper,
                 const std::string& output, std::ostream& out) {
    ProjectConfig config = load_config(read_file(config_path));
    const auto& old = *config.space;
    config.space = TransformSpace(old.baseline(), parse_point(lower, "--lower"), parse_point(upper, "--upper"),
                                  old.calib_detail(), old.calib_expr());
    const std::string doc = export_config(config);
    write_file(output.empty() ? config_path : output, doc);
    out << "wrote " << (output.empty() ? config_path : output) << "\n";
}

struct StyleFlags {
    double detail = 0, expr = 0;
    std::string repr = "default";
    std::string genre = "off";

    ViewerPrefs prefs() const {
        const auto mode = parse_representation(repr);
        if (!mode) throw captune::Error(ErrorCode::BadRequest, "unknown --repr " + repr);
        return {{detail, expr}, *mode, genre == "on"};
    }
};

void cmd_transform(const std::string& config_path, const StyleFlags& style, bool detail_set, bool expr_set,
                   const std::string& output, bool crlf, const BackendFlags& bf, std::ostream& out) {
    const ProjectConfig config = load_config(read_file(config_path));
    ViewerPrefs prefs = style.prefs();
    if (!detail_set) prefs.target.detail = config.space->baseline().detail;
    if (!expr_set) prefs.target.expressiveness = config.space->baseline().expressiveness;
    auto backend = bf.make();
    const CaptionTrack track = transform_track(config, prefs, *backend);
    const std::string srt = serialize_srt(track, crlf ? LineEnding::CrLf : LineEnding::Lf);
    if (output.empty() || output == "-") {
        out << srt;
    } else {
        write_file(output, srt);
        log::info("transform.written", {{"path", output}, {"cues", track.cues.size()}});
    }
}

void cmd_sweep(const std::string& config_path, const std::string& out_dir, const StyleFlags& style,
               const BackendFlags& bf, std::ostream& out) {
    const ProjectConfig config = load_config(read_file(config_path));
    const auto& space = *config.space;
    auto backend = bf.make();
    std::filesystem::create_directories(out_dir);

    std::ostringstream report;
    report << "detail,expressiveness,status,nsi_cues,transformed_cues,content_words,modifiers,"
              "mean_estimated_detail,mean_estimated_expressiveness,detail_drift,expressiveness_drift,file\n";
    int written = 0, skipped = 0;
    for (int d = 1; d <= 10; ++d) {
        for (int e = 1; e <= 10; ++e) {
            const ParamPoint cell{double(d), double(e)};
            if (!space.contains(cell)) {
                report << fmt::format("{},{},skipped,,,,,,,,,\n", d, e);
                ++skipped;
                continue;
            }
            ViewerPrefs prefs = style.prefs();
            prefs.target = cell;
            const CaptionTrack track = transform_track(config, prefs, *backend);
            int nsi = 0, changed = 0, words = 0, mods = 0;
            double est_d = 0, est_e = 0;
            for (std::size_t i = 0; i < track.cues.size(); ++i) {
                const auto& c = track.cues[i];
                if (!c.is_nsi()) continue;
                ++nsi;
                if (c.text != config.original_track.cues[i].text) ++changed;
                words += mock::content_word_count(c.text);
                mods += mock::modifier_count(c.text);
                const auto est = backend->estimate(c.text, std::nullopt);
                est_d += est.detail;
                est_e += est.expressiveness;
            }
            const std::string file = fmt::format("cell_d{:02}_e{:02}.srt", d, e);
            write_file(std::filesystem::path(out_dir) / file, serialize_srt(track));
            const double n = nsi ? nsi : 1;
            report << fmt::format("{},{},ok,{},{},{},{},{:.3f},{:.3f},{:.3f},{:.3f},{}\n", d, e, nsi, changed, words,
                                  mods, est_d / n, est_e / n, est_d / n - d, est_e / n - e, file);
            ++written;
        }
    }
    write_file(std::filesystem::path(out_dir) / "report.csv", report.str());
    out << fmt::format("{} cells written, {} skipped, report at {}\n", written, skipped,
                       (std::filesystem::path(out_dir) / "report.csv").string());
}

void cmd_serve(const std::string& addr, const std::string& data_dir, const std::string& cors,
               const BackendFlags& bf, std::ostream& out) {
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos) throw captune::Error(ErrorCode::BadRequest, "--addr expects HOST:PORT");
    const std::string host = addr.substr(0, colon);
    int port = 0;
    try {
        port = std::stoi(addr.substr(colon + 1));
    } catch (const std::exception&) {
        throw captune::Error(ErrorCode::BadRequest, "--addr expects HOST:PORT");
    }

    Service service(bf.make(), data_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(data_dir));
    HttpServer server(service, cors);
    const int bound = server.bind(host, port);
    if (bound < 0) throw captune::Error(ErrorCode::BadRequest, "cannot bind " + addr, {{"addr", addr}});
    g_server = &server;
    auto prev_int = std::signal(SIGINT, on_signal);
    auto prev_term = std::signal(SIGTERM, on_signal);
    log::info("serve.listening", {{"host", host}, {"port", bound}, {"backend", bf.kind}});
    out << fmt::format("listening on http://{}:{}\n", host, bound) << std::flush;
    server.serve();
    g_server = nullptr;
    std::signal(SIGINT, prev_int);
    std::signal(SIGTERM, prev_term);
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Customize non-speech captions within creator-defined bounds", "captune"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags such as --log-level also work after the subcommand
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "debug, info, warn or error")
        ->check(CLI::IsMember({"debug", "info", "warn", "error"}))
        ->capture_default_str();

    bool as_json = false, lenient = false;
    std::string srt_path;
    auto* inspect = app.add_subcommand("inspect", "List cues with NSI flags and categories");
    inspect->add_option("srt", srt_path, "SRT file")->required();
    inspect->add_flag("--json", as_json, "Machine-readable listing");
    inspect->add_flag("--lenient", lenient, "Skip malformed cues instead of failing");

    BackendFlags calib_backend;
    std::string calib_desc;
    auto* calibrate = app.add_subcommand("calibrate", "Estimate the baseline of a caption file");
    calibrate->add_option("srt", srt_path, "SRT file")->required();
    calibrate->add_option("--descriptions", calib_desc, "Scene description sidecar (JSON)");
    calibrate->add_flag("--json", as_json);
    calib_backend.add_to(calibrate);

    InitFlags init_flags;
    BackendFlags init_backend;
    auto* init = app.add_subcommand("init", "Calibrate, set anchors and export a project config");
    init->add_option("srt", init_flags.srt, "SRT file")->required();
    init->add_option("--lower", init_flags.lower, "Lower anchor DETAIL,EXPRESSIVENESS")->required();
    init->add_option("--upper", init_flags.upper, "Upper anchor DETAIL,EXPRESSIVENESS")->required();
    init->add_option("-o,--output", init_flags.output, "Config path (default stdout)");
    init->add_option("--descriptions", init_flags.descriptions, "Scene description sidecar (JSON)");
    init->add_option("--title", init_flags.title);
    init->add_option("--genre", init_flags.genre);
    init->add_option("--synopsis", init_flags.synopsis);
    init_backend.add_to(init);

    std::string config_path, output, lower, upper;
    auto* anchors = app.add_subcommand("anchors", "Replace the anchors of an existing config");
    anchors->add_option("config", config_path)->required();
    anchors->add_option("--lower", lower)->required();
    anchors->add_option("--upper", upper)->required();
    anchors->add_option("-o,--output", output, "Output path (default: overwrite)");

    StyleFlags style;
    BackendFlags transform_backend;
    bool crlf = false;
    auto* transform = app.add_subcommand("transform", "Transform a track for one viewer preference");
    transform->add_option("config", config_path)->required();
    auto* detail_opt = transform->add_option("--detail", style.detail, "Level of Detail (1-10)");
    auto* expr_opt = transform->add_option("--expr", style.expr, "Expressiveness (1-10)");
    transform->add_option("--repr", style.repr)
        ->check(CLI::IsMember({"default", "source_focused", "onomatopoeia", "sensory_quality"}))
        ->capture_default_str();
    transform->add_option("--genre", style.genre)->check(CLI::IsMember({"on", "off"}))->capture_default_str();
    transform->add_option("-o,--output", output, "Output SRT (default stdout)");
    transform->add_flag("--crlf", crlf, "Write CRLF line endings");
    transform_backend.add_to(transform);

    StyleFlags sweep_style;
    BackendFlags sweep_backend;
    std::string out_dir;
    auto* sweep = app.add_subcommand("sweep", "Transform every enabled grid cell and write a CSV report");
    sweep->add_option("config", config_path)->required();
    sweep->add_option("outdir", out_dir)->required();
    sweep->add_option("--repr", sweep_style.repr)
        ->check(CLI::IsMember({"default", "source_focused", "onomatopoeia", "sensory_quality"}));
    sweep->add_option("--genre", sweep_style.genre)->check(CLI::IsMember({"on", "off"}));
    sweep_backend.add_to(sweep);

    BackendFlags serve_backend;
    std::string addr = "127.0.0.1:8080", data_dir, cors = "*";
    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    serve->add_option("--addr", addr, "HOST:PORT")->capture_default_str();
    serve->add_option("--data-dir", data_dir, "Append-only store for projects and sessions");
    serve->add_option("--cors-origin", cors)->capture_default_str();
    serve_backend.add_to(serve);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    log::set_level(*log::parse_level(log_level));
    log::set_sink(&err);
    struct SinkReset {
        ~SinkReset() { log::set_sink(nullptr); }
    } sink_reset;

    try {
        if (*inspect) cmd_inspect(srt_path, as_json, lenient, out, err);
        else if (*calibrate) cmd_calibrate(srt_path, calib_desc, calib_backend, as_json, out);
        else if (*init) cmd_init(init_flags, init_backend, out);
        else if (*anchors) cmd_anchors(config_path, lower, upper, output, out);
        else if (*transform)
            cmd_transform(config_path, style, detail_opt->count() > 0, expr_opt->count() > 0, output, crlf,
                          transform_backend, out);
        else if (*sweep) cmd_sweep(config_path, out_dir, sweep_style, sweep_backend, out);
        else if (*serve) cmd_serve(addr, data_dir, cors, serve_backend, out);
        return 0;
    } catch (const captune::Error& e) {
        std::string where;
        if (auto line = e.line()) where = fmt::format(" (line {})", *line);
        if (e.details().contains("path") && e.details()["path"].is_string()) {
            where += fmt::format(" [{}]", e.details()["path"].get<std::string>());
        }
        err << fmt::format("error: {}: {}{}\n", to_string(e.code()), e.what(), where);
        log::error("cli.failed", {{"code", to_string(e.code())}, {"message", e.what()}, {"details", e.details()}});
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace captune::cli
