#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "uitf/attention.hpp"
#include "uitf/extrapolation.hpp"
#include "uitf/harness.hpp"
#include "uitf/oracle.hpp"
#include "uitf/rng.hpp"
#include "uitf/rope.hpp"
#include "uitf/serialization.hpp"
#include "uitf/tensor_io.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using namespace uitf;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::size_t workers_from_env() {
    const char* env = std::getenv("UITF_WORKERS");
    if (!env || !*env) {
        return 0;
    }
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
        std::cerr << "warning: ignoring non-numeric UITF_WORKERS\n";
        return 0;
    }
    return static_cast<std::size_t>(v);
}

std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << text;
    if (!out) {
        throw IoError("short write to " + path.string());
    }
}

void emit_json(const json& doc) { std::cout << doc.dump(2) << "\n"; }

// ---------------------------------------------------------------- analyze --

struct AnalyzeOpts {
    double base = 10000.0;
    std::size_t axis_dim = 0;
    std::size_t train_len = 0;
    std::size_t target_len = 0;
    bool as_json = false;
};

int run_analyze(const AnalyzeOpts& o) {
    rope::RopeConfig config{o.base, o.axis_dim, 1};
    const rope::FrequencySchedule schedule = rope::build_schedule(config);
    const std::size_t target = o.target_len == 0 ? o.train_len : o.target_len;
    const rope::PeriodTable table = rope::period_table(schedule, o.train_len);
    const std::size_t k = table.dominant_index;
    const bool ok = rope::check_non_repetition(schedule, k, target);

    if (o.as_json) {
        emit_json(json{{"base", o.base},
                       {"axis_dim", o.axis_dim},
                       {"train_len", o.train_len},
                       {"target_len", target},
                       {"freqs", schedule.freqs()},
                       {"periods", table.periods},
                       {"dominant", {{"zero_based", k}, {"one_based", k + 1}}},
                       {"dominant_period", table.periods[k]},
                       {"non_repetition", ok}});
        return kExitOk;
    }

    std::printf("schedule: base=%g axis_dim=%zu (%zu frequency pairs)\n", o.base, o.axis_dim,
                schedule.size());
    std::printf("%10s %10s %16s %16s\n", "j(1-based)", "j(0-based)", "theta", "period");
    for (std::size_t j = 0; j < schedule.size(); ++j) {
        std::printf("%10zu %10zu %16.9e %16.9e%s\n", j + 1, j, schedule.freqs()[j],
                    table.periods[j], j == k ? "  <- dominant" : "");
    }
    std::printf("dominant index vs train length %zu: %zu (1-based) / %zu (0-based), period %.6g\n",
                o.train_len, k + 1, k, table.periods[k]);
    std::printf("non-repetition at target %zu: %s\n", target, ok ? "holds" : "violated");
    return kExitOk;
}

// ---------------------------------------------------------------- correct --

struct CorrectOpts {
    std::string schedule_path;
    std::string schedule_w_path;
    std::string mode;
    std::string out_path;
    double scale = 1.0;
    std::size_t train_len = 0;
    std::size_t target_len = 0;
    std::size_t train_h = 0, train_w = 0, target_h = 0, target_w = 0;
    std::string detector = "auto";
    double window = 0.25;
    double tolerance = 1e-6;
    double yarn_alpha = 1.0;
    double yarn_beta = 32.0;
    bool as_json = false;
};

/// rdfc writes three files next to --out: <stem>.h.json, <stem>.w.json and
/// <stem>.rdfc.jsonl.
struct RdfcPaths {
    fs::path h, w, log;
};

RdfcPaths rdfc_paths(const fs::path& out) {
    fs::path stem = out;
    if (stem.extension() == ".json") {
        stem.replace_extension();
    }
    RdfcPaths paths;
    paths.h = stem;
    paths.h += ".h.json";
    paths.w = stem;
    paths.w += ".w.json";
    paths.log = stem;
    paths.log += ".rdfc.jsonl";
    return paths;
}

int run_correct(const CorrectOpts& o) {
    const rope::FrequencySchedule input = ser::load_schedule(o.schedule_path);

    if (o.mode == "rdfc") {
        const rope::FrequencySchedule input_w =
            o.schedule_w_path.empty() ? input : ser::load_schedule(o.schedule_w_path);
        const rope::ResolutionSpec spec(o.train_h, o.train_w, o.target_h, o.target_w);
        const extrap::PeriodDetector detector = o.detector == "collision"
                                                    ? extrap::collision_detector(o.tolerance)
                                                    : extrap::auto_detector(o.window);
        const RdfcPaths paths = rdfc_paths(o.out_path);
        extrap::RdfcLog log;
        bool converged = false;
        std::string failure;
        try {
            extrap::RdfcResult result = extrap::rdfc(input, input_w, spec, detector);
            log = std::move(result.log);
            converged = log.converged;
            ser::save_schedule(paths.h, result.sched_h);
            ser::save_schedule(paths.w, result.sched_w);
        } catch (const extrap::StagnationError& e) {
            log = e.partial_log;
            failure = e.what();
        } catch (const extrap::IterationCapError& e) {
            log = e.partial_log;
            failure = e.what();
        }
        write_text(paths.log, ser::rdfc_log_to_json_lines(log));
        if (o.as_json) {
            json doc{{"mode", "rdfc"},
                     {"converged", converged},
                     {"iterations", log.iterations.size()},
                     {"log", paths.log.string()}};
            if (converged) {
                doc["out"] = {paths.h.string(), paths.w.string()};
            } else {
                doc["error"] = failure;
            }
            emit_json(doc);
        }
        if (!converged) {
            std::cerr << "error: " << failure << " (partial log in " << paths.log.string()
                      << ")\n";
            return kExitRuntime;
        }
        if (!o.as_json) {
            std::printf("rdfc converged after %zu corrections\n", log.iterations.size());
            std::printf("wrote %s, %s and %s\n", paths.h.string().c_str(),
                        paths.w.string().c_str(), paths.log.string().c_str());
        } else {
            std::cerr << "rdfc converged after " << log.iterations.size() << " corrections\n";
        }
        return kExitOk;
    }

    rope::FrequencySchedule corrected = input;
    if (o.mode == "pi") {
        corrected = extrap::scale_pi(input, o.scale);
    } else if (o.mode == "ntk") {
        corrected = extrap::scale_ntk(input.config(), o.scale);
    } else if (o.mode == "yarn") {
        corrected = extrap::scale_yarn(input.config(), o.scale, o.train_len,
                                       {o.yarn_alpha, o.yarn_beta});
    } else if (o.mode == "dominant") {
        corrected = extrap::correct_dominant(input, o.train_len, o.target_len).first;
    }
    ser::save_schedule(o.out_path, corrected);
    if (o.as_json) {
        emit_json(json{{"mode", o.mode},
                       {"out", o.out_path},
                       {"corrections", corrected.corrections().size()}});
    } else {
        std::printf("wrote %s (%zu correction records)\n", o.out_path.c_str(),
                    corrected.corrections().size());
    }
    return kExitOk;
}

// ----------------------------------------------------------------- attend --

struct AttendOpts {
    std::string q_path, k_path, v_path;
    std::string out_path;
    std::string report_path;
    double lambda_min = 1.0;
    double lambda_max = 1.3;
    double exponent_p = 2.0;
    std::size_t b_q = 128;
    std::size_t b_kv = 128;
    std::size_t workers = 0;
    bool check = false;
    double tolerance = 0.0;
    bool as_json = false;
};

template <typename T>
int run_attend_typed(Tensor<T> q, Tensor<T> k, Tensor<T> v, const AttendOpts& o) {
    const attn::AttentionInputs<T> inputs{std::move(q), std::move(k), std::move(v)};
    const attn::ConcentrationConfig cfg{o.lambda_min, o.lambda_max, o.exponent_p};
    const attn::BlockConfig blocks{o.b_q, o.b_kv};
    const auto started = std::chrono::steady_clock::now();
    attn::ConcentratedResult<T> result =
        attn::concentrated_attention(inputs, cfg, blocks, nullptr, false, o.workers);
    const double elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
            .count();

    if (!o.out_path.empty()) {
        io::write_tensor(o.out_path, result.output);
        std::cerr << "wrote " << o.out_path << "\n";
    }

    json report{{"heads", inputs.heads()},
                {"tokens", inputs.tokens()},
                {"head_dim", inputs.head_dim()},
                {"value_dim", inputs.value_dim()},
                {"dtype", sizeof(T) == 4 ? "f32" : "f64"},
                {"blocks", {{"b_q", o.b_q}, {"b_kv", o.b_kv}}},
                {"concentration",
                 {{"lambda_min", o.lambda_min},
                  {"lambda_max", o.lambda_max},
                  {"exponent_p", o.exponent_p}}},
                {"entropy",
                 {{"per_head", result.entropy.per_head},
                  {"h_min", result.entropy.h_min},
                  {"h_max", result.entropy.h_max}}},
                {"focus", {{"per_head", result.focus.per_head}}},
                {"elapsed_ms", elapsed_ms}};

    bool check_passed = true;
    if (o.check) {
        const Tensor<double> expected = oracle::naive_attention(inputs, result.focus.per_head);
        double deviation = 0.0;
        for (std::size_t i = 0; i < expected.values.size(); ++i) {
            deviation = std::max(deviation, std::abs(static_cast<double>(result.output.values[i]) -
                                                     expected.values[i]));
        }
        const double tol = o.tolerance > 0.0 ? o.tolerance : (sizeof(T) == 4 ? 1e-4 : 1e-8);
        check_passed = deviation <= tol;
        report["check"] = {{"max_abs_deviation", deviation},
                           {"tolerance", tol},
                           {"passed", check_passed}};
    }

    if (!o.report_path.empty()) {
        write_text(o.report_path, report.dump(2) + "\n");
        std::cerr << "wrote " << o.report_path << "\n";
    }
    if (o.as_json) {
        emit_json(report);
    } else {
        std::printf("attention over %zu head(s), %zu tokens (dtype %s)\n", inputs.heads(),
                    inputs.tokens(), sizeof(T) == 4 ? "f32" : "f64");
        for (std::size_t h = 0; h < inputs.heads(); ++h) {
            std::printf("  head %zu: entropy %.6f nats, focus %.6f\n", h,
                        result.entropy.per_head[h], result.focus.per_head[h]);
        }
        if (o.check) {
            std::printf("oracle deviation %.3e (tolerance %.1e): %s\n",
                        report["check"]["max_abs_deviation"].get<double>(),
                        report["check"]["tolerance"].get<double>(),
                        check_passed ? "ok" : "FAILED");
        }
    }
    if (!check_passed) {
        std::cerr << "error: engine deviates from the dense reference beyond tolerance\n";
        return kExitRuntime;
    }
    return kExitOk;
}

int run_attend(const AttendOpts& o) {
    TensorData q = io::read_tensor(o.q_path);
    TensorData k = io::read_tensor(o.k_path);
    TensorData v = io::read_tensor(o.v_path);
    if (q.index() != k.index() || q.index() != v.index()) {
        throw FormatError("q/k/v tensor files disagree on element type");
    }
    if (std::holds_alternative<Tensor<float>>(q)) {
        return run_attend_typed<float>(std::get<Tensor<float>>(std::move(q)),
                                       std::get<Tensor<float>>(std::move(k)),
                                       std::get<Tensor<float>>(std::move(v)), o);
    }
    return run_attend_typed<double>(std::get<Tensor<double>>(std::move(q)),
                                    std::get<Tensor<double>>(std::move(k)),
                                    std::get<Tensor<double>>(std::move(v)), o);
}

// ------------------------------------------------------------------ bench --

struct BenchOpts {
    std::size_t n = 4096;
    std::size_t heads = 1;
    std::size_t head_dim = 64;
    std::size_t value_dim = 0;
    std::size_t b_q = 128;
    std::size_t b_kv = 128;
    std::size_t workers = 0;
    std::uint64_t seed = 1;
    double budget_gflop = 500.0;
    bool dry_run = false;
    bool as_json = false;
};

int run_bench(const BenchOpts& o) {
    const std::size_t vd = o.value_dim == 0 ? o.head_dim : o.value_dim;
    const attn::BlockConfig blocks{o.b_q, o.b_kv};
    const attn::MemoryReport mem =
        attn::memory_report(o.n, o.heads, o.head_dim, vd, blocks, sizeof(float));

    const double n2 = static_cast<double>(o.n) * static_cast<double>(o.n);
    const double est_gflop = static_cast<double>(o.heads) * n2 *
                             (4.0 * static_cast<double>(o.head_dim) +
                              2.0 * static_cast<double>(vd) + 16.0) /
                             1e9;

    json doc{{"n", o.n},
             {"heads", o.heads},
             {"head_dim", o.head_dim},
             {"value_dim", vd},
             {"blocks", {{"b_q", o.b_q}, {"b_kv", o.b_kv}}},
             {"workers", o.workers},
             {"dtype", "f32"},
             {"estimated_gflop", est_gflop},
             {"engine_bytes", mem.engine_bytes},
             {"naive_bytes", mem.naive_bytes},
             {"dry_run", o.dry_run}};

    if (!o.dry_run) {
        if (est_gflop > o.budget_gflop) {
            throw SizeError("estimated " + std::to_string(est_gflop) +
                            " GFLOP exceeds the budget of " + std::to_string(o.budget_gflop) +
                            " (use --dry-run for the analytic report, or raise --budget-gflop)");
        }
        SplitMix64 rng(o.seed);
        auto fill = [&rng](std::vector<std::size_t> shape) {
            Tensor<float> t = Tensor<float>::zeros(std::move(shape));
            for (float& x : t.values) {
                x = static_cast<float>(rng.next_normal());
            }
            return t;
        };
        attn::AttentionInputs<float> inputs{fill({o.heads, o.n, o.head_dim}),
                                            fill({o.heads, o.n, o.head_dim}),
                                            fill({o.heads, o.n, vd})};

        const auto t0 = std::chrono::steady_clock::now();
        const attn::EntropyReport entropy = attn::entropy_pass(inputs, blocks, o.workers);
        const auto t1 = std::chrono::steady_clock::now();
        const attn::FocusMap focus = attn::focus_map(entropy, {});
        std::uint64_t peak = 0;
        const Tensor<float> out = attn::attention_forward(inputs, focus, blocks, o.workers, &peak);
        const auto t2 = std::chrono::steady_clock::now();

        doc["entropy_ms"] = std::chrono::duration<double, std::milli>(t1 - t0).count();
        doc["forward_ms"] = std::chrono::duration<double, std::milli>(t2 - t1).count();
        doc["peak_scratch_bytes"] = peak;
        doc["output_checksum"] = hex64(fnv1a64(out.values.data(), out.values.size() * 4));
    }

    if (o.as_json) {
        emit_json(doc);
        return kExitOk;
    }
    std::printf("n=%zu heads=%zu head_dim=%zu value_dim=%zu blocks=%zux%zu\n", o.n, o.heads,
                o.head_dim, vd, o.b_q, o.b_kv);
    std::printf("analytic per-worker engine scratch: %llu bytes\n",
                static_cast<unsigned long long>(mem.engine_bytes));
    std::printf("analytic dense score matrix:        %llu bytes\n",
                static_cast<unsigned long long>(mem.naive_bytes));
    if (!o.dry_run) {
        std::printf("entropy pass:  %10.2f ms\n", doc["entropy_ms"].get<double>());
        std::printf("forward pass:  %10.2f ms\n", doc["forward_ms"].get<double>());
        std::printf("measured peak scratch: %llu bytes per worker\n",
                    static_cast<unsigned long long>(doc["peak_scratch_bytes"].get<std::uint64_t>()));
        std::printf("output checksum: %s\n", doc["output_checksum"].get<std::string>().c_str());
    }
    return kExitOk;
}

// --------------------------------------------------------------- fixtures --

struct FixtureOpts {
    std::uint64_t seed = 42;
    std::string out_dir;
    std::vector<std::string> sizes;
    std::vector<std::string> grids;
    std::string dtype = "f32";
    bool as_json = false;
};

std::vector<std::size_t> parse_dims(const std::string& text) {
    std::vector<std::size_t> dims;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t next = text.find('x', pos);
        const std::string part = text.substr(pos, next == std::string::npos ? next : next - pos);
        char* end = nullptr;
        const unsigned long long v = std::strtoull(part.c_str(), &end, 10);
        if (end == part.c_str() || *end != '\0' || v == 0) {
            throw ArgumentError("malformed size triple \"" + text + "\"");
        }
        dims.push_back(static_cast<std::size_t>(v));
        if (next == std::string::npos) {
            break;
        }
        pos = next + 1;
    }
    if (dims.size() != 3) {
        throw ArgumentError("size triples take exactly three extents, got \"" + text + "\"");
    }
    return dims;
}

TensorData normal_fixture(std::vector<std::size_t> shape, bool f64, SplitMix64& rng) {
    if (f64) {
        Tensor<double> t = Tensor<double>::zeros(std::move(shape));
        for (double& x : t.values) {
            x = rng.next_normal();
        }
        return t;
    }
    Tensor<float> t = Tensor<float>::zeros(std::move(shape));
    for (float& x : t.values) {
        x = static_cast<float>(rng.next_normal());
    }
    return t;
}

int run_fixtures(const FixtureOpts& o) {
    struct Request {
        std::string dims;
        std::string dtype;
        bool grid;
    };
    std::vector<Request> requests;
    if (o.sizes.empty() && o.grids.empty()) {
        requests = {{"2x64x16", "f32", false},
                    {"1x1x8", "f32", false},
                    {"1x16x8", "f64", false},
                    {"8x8x12", "f64", true}};
    } else {
        for (const std::string& s : o.sizes) {
            requests.push_back({s, o.dtype, false});
        }
        for (const std::string& g : o.grids) {
            requests.push_back({g, o.dtype, true});
        }
    }

    fs::create_directories(o.out_dir);
    json files = json::array();
    auto emit_file = [&](const std::string& name, const TensorData& data) {
        const fs::path path = fs::path(o.out_dir) / name;
        io::write_tensor(path, data);
        std::ifstream in(path, std::ios::binary);
        const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                               std::istreambuf_iterator<char>());
        const bool f64 = std::holds_alternative<Tensor<double>>(data);
        const auto& shape = f64 ? std::get<Tensor<double>>(data).shape
                                : std::get<Tensor<float>>(data).shape;
        files.push_back({{"name", name},
                         {"dtype", f64 ? "f64" : "f32"},
                         {"shape", shape},
                         {"bytes", bytes.size()},
                         {"fnv1a64", hex64(fnv1a64(bytes.data(), bytes.size()))}});
        std::cerr << "wrote " << path.string() << "\n";
    };

    for (const Request& req : requests) {
        const std::vector<std::size_t> dims = parse_dims(req.dims);
        const bool f64 = req.dtype == "f64";
        if (req.grid) {
            const std::string name = "grid_" + req.dims + "_" + req.dtype + ".uitf";
            SplitMix64 rng(o.seed ^ fnv1a64(name.data(), name.size()));
            // same [h*w, feature] layout the harness builds
            TensorData data = normal_fixture({dims[0] * dims[1], dims[2]}, f64, rng);
            emit_file(name, data);
        } else {
            for (const char* role : {"q", "k", "v"}) {
                const std::string name =
                    std::string(role) + "_" + req.dims + "_" + req.dtype + ".uitf";
                SplitMix64 rng(o.seed ^ fnv1a64(name.data(), name.size()));
                TensorData data = normal_fixture({dims[0], dims[1], dims[2]}, f64, rng);
                emit_file(name, data);
            }
        }
    }

    const json manifest{{"seed", o.seed}, {"files", files}};
    write_text(fs::path(o.out_dir) / "manifest.json", manifest.dump(2) + "\n");
    if (o.as_json) {
        emit_json(manifest);
    } else {
        std::printf("wrote %zu fixture files and manifest.json to %s\n", files.size(),
                    o.out_dir.c_str());
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rotary-frequency analysis and entropy-guided attention toolkit"};
    app.require_subcommand(1);
    const std::size_t default_workers = workers_from_env();

    AnalyzeOpts an;
    CLI::App* analyze = app.add_subcommand("analyze", "period table and non-repetition verdict");
    analyze->add_option("--base", an.base, "frequency base b")->check(CLI::PositiveNumber);
    analyze->add_option("--axis-dim", an.axis_dim, "per-axis rotary dimension d' (even)")
        ->required();
    analyze->add_option("--train-len", an.train_len, "training extent in tokens")->required();
    analyze->add_option("--target-len", an.target_len, "target extent (default: train)");
    analyze->add_flag("--json", an.as_json, "machine-readable output on stdout");

    CorrectOpts co;
    CLI::App* correct = app.add_subcommand("correct", "produce an extrapolated schedule");
    correct->add_option("--schedule", co.schedule_path, "input schedule JSON (h axis for rdfc)")
        ->required()
        ->check(CLI::ExistingFile);
    correct->add_option("--schedule-w", co.schedule_w_path, "rdfc w-axis schedule (default: --schedule)")
        ->check(CLI::ExistingFile);
    correct->add_option("--mode", co.mode, "pi|ntk|yarn|dominant|rdfc")
        ->required()
        ->check(CLI::IsMember({"pi", "ntk", "yarn", "dominant", "rdfc"}));
    correct->add_option("--out", co.out_path, "output schedule path (rdfc adds .h/.w/.rdfc.jsonl)")
        ->required();
    correct->add_option("--scale", co.scale, "extrapolation factor s >= 1 (pi/ntk/yarn)");
    correct->add_option("--train-len", co.train_len, "training extent (yarn/dominant)");
    correct->add_option("--target-len", co.target_len, "target extent (dominant)");
    correct->add_option("--train-h", co.train_h, "rdfc training height");
    correct->add_option("--train-w", co.train_w, "rdfc training width");
    correct->add_option("--target-h", co.target_h, "rdfc target height");
    correct->add_option("--target-w", co.target_w, "rdfc target width");
    correct->add_option("--detector", co.detector, "rdfc period detector")
        ->check(CLI::IsMember({"auto", "collision"}));
    correct->add_option("--window", co.window, "auto detector window in (0,1]");
    correct->add_option("--tolerance", co.tolerance, "collision detector tolerance");
    correct->add_option("--alpha", co.yarn_alpha, "yarn low-rotation threshold");
    correct->add_option("--beta", co.yarn_beta, "yarn high-rotation threshold");
    correct->add_flag("--json", co.as_json, "machine-readable output on stdout");

    AttendOpts at;
    at.workers = default_workers;
    CLI::App* attend = app.add_subcommand("attend", "run concentrated attention on tensor files");
    attend->add_option("--q", at.q_path, "query tensor [heads, tokens, head_dim]")
        ->required()
        ->check(CLI::ExistingFile);
    attend->add_option("--k", at.k_path, "key tensor [heads, tokens, head_dim]")
        ->required()
        ->check(CLI::ExistingFile);
    attend->add_option("--v", at.v_path, "value tensor [heads, tokens, value_dim]")
        ->required()
        ->check(CLI::ExistingFile);
    attend->add_option("--out", at.out_path, "output tensor path");
    attend->add_option("--report", at.report_path, "report JSON path");
    attend->add_option("--lambda-min", at.lambda_min, "focus lower bound");
    attend->add_option("--lambda-max", at.lambda_max, "focus upper bound");
    attend->add_option("--p", at.exponent_p, "focus curvature exponent");
    attend->add_option("--bq", at.b_q, "query block size");
    attend->add_option("--bkv", at.b_kv, "key/value block size");
    attend->add_option("--workers", at.workers, "worker threads (0 = hardware)");
    attend->add_flag("--check", at.check, "compare against the dense reference");
    attend->add_option("--tolerance", at.tolerance, "--check tolerance (0 = dtype default)");
    attend->add_flag("--json", at.as_json, "machine-readable report on stdout");

    BenchOpts be;
    be.workers = default_workers;
    CLI::App* bench = app.add_subcommand("bench", "time the streaming engine, report memory");
    bench->add_option("--n", be.n, "token count");
    bench->add_option("--heads", be.heads, "head count");
    bench->add_option("--dim", be.head_dim, "head_dim");
    bench->add_option("--value-dim", be.value_dim, "value_dim (default: --dim)");
    bench->add_option("--bq", be.b_q, "query block size");
    bench->add_option("--bkv", be.b_kv, "key/value block size");
    bench->add_option("--workers", be.workers, "worker threads (0 = hardware)");
    bench->add_option("--seed", be.seed, "input seed");
    bench->add_option("--budget-gflop", be.budget_gflop, "refuse runs estimated beyond this");
    bench->add_flag("--dry-run", be.dry_run, "analytic report only, no execution");
    bench->add_flag("--json", be.as_json, "machine-readable output on stdout");

    FixtureOpts fx;
    CLI::App* fixtures = app.add_subcommand("fixtures", "write seeded tensor fixtures");
    fixtures->add_option("--seed", fx.seed, "base seed");
    fixtures->add_option("--out-dir", fx.out_dir, "target directory")->required();
    fixtures->add_option("--sizes", fx.sizes, "q/k/v triples as HEADSxTOKENSxDIM");
    fixtures->add_option("--grids", fx.grids, "grids as HxWxFEATURES");
    fixtures->add_option("--dtype", fx.dtype, "element type for --sizes/--grids")
        ->check(CLI::IsMember({"f32", "f64"}));
    fixtures->add_flag("--json", fx.as_json, "manifest on stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*analyze) return run_analyze(an);
        if (*correct) return run_correct(co);
        if (*attend) return run_attend(at);
        if (*bench) return run_bench(be);
        if (*fixtures) return run_fixtures(fx);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
