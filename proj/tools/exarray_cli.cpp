// exarray: load rho/event JSON specs, run one estimator or test, write a report.
//
// Exit status: 0 success, 1 internal error, 2 bad input (parse, schema or
// validation failure), 3 inconsistent verdict under --assert.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "exarray/exarray.hpp"
#include "exarray/json_io.hpp"

using namespace exarray;
using io::json;

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;
constexpr int kExitAssert = 3;

/// Bad input with a message already anchored to a file and line.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string command;
    std::string rho_path, event_path, event2_path;
    std::uint64_t n = 100000;
    std::vector<std::uint64_t> m;
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
    std::string out;
    std::string format = "json";
    bool assert_verdict = false;
    bool no_timestamp = false;
    std::vector<std::uint64_t> f1, f2;
    std::size_t blocks = 2;
    std::uint64_t length = 1000;
    std::size_t bins = 20;
    std::uint64_t k = 100;
    std::string set, dist;
    double eps = 0.01;
    bool reuse_array = false;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_of(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

/// Best-effort line for a schema path: follow its object keys through the text.
std::size_t line_of_path(const std::string& text, const std::string& path) {
    std::size_t pos = 0, found = std::string::npos;
    std::stringstream ss(path);
    std::string seg;
    while (std::getline(ss, seg, '/')) {
        if (seg.empty() || std::all_of(seg.begin(), seg.end(), ::isdigit)) continue;
        const auto at = text.find("\"" + seg + "\"", pos);
        if (at == std::string::npos) break;
        found = pos = at;
    }
    return found == std::string::npos ? 1 : line_of(text, found);
}

/// A JSON document from a file, or inline text when no such file exists.
struct Source {
    std::string name;
    std::string text;
    json doc;
};

Source load(const std::string& arg) {
    Source s;
    if (std::filesystem::exists(arg)) {
        s.name = arg;
        s.text = read_file(arg);
    } else {
        s.name = "<inline>";
        s.text = arg;
    }
    try {
        s.doc = json::parse(s.text);
    } catch (const json::parse_error& e) {
        throw InputError(s.name + ":" + std::to_string(line_of(s.text, e.byte == 0 ? 0 : e.byte - 1)) +
                         ": parse error: " + e.what());
    }
    return s;
}

template <class Fn>
auto parse_with(const Source& s, Fn&& fn) -> decltype(fn(s.doc)) {
    try {
        return fn(s.doc);
    } catch (const SchemaError& e) {
        throw InputError(s.name + ":" + std::to_string(line_of_path(s.text, e.path())) + ": " + e.what());
    }
}

RhoSpec load_rho(const std::string& path) {
    if (path.empty()) throw InputError("--rho is required for this command");
    const auto src = load(path);
    auto rho = parse_with(src, [](const json& j) { return io::rho_from_json(j); });
    const auto v = validate_spec(rho);
    if (!v.valid) {
        std::string msg = src.name + ":1: invalid rho spec";
        for (const auto& f : v.findings) msg += "\n  " + f;
        throw InputError(msg);
    }
    return rho;
}

EventHypergraph load_event(const std::string& path, const RhoSpec& rho) {
    if (path.empty()) throw InputError("--event is required for this command");
    const auto src = load(path);
    return parse_with(src, [&](const json& j) { return io::event_from_json(j, rho.output()); });
}

IndexMap default_map(std::size_t size, std::uint64_t offset) {
    IndexMap f(size);
    for (std::size_t i = 0; i < size; ++i) f[i] = offset + i + 1;
    return f;
}

std::uint64_t single_m(const Options& o) {
    if (o.m.size() != 1) throw InputError("-M takes exactly one value for this command");
    return o.m.front();
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Result {
    json report;
    std::string csv;
    bool inconsistent = false;
};

json config_json(const Options& o) {
    json c{{"command", o.command}, {"N", o.n}, {"seed", *o.seed}, {"workers", o.workers}, {"format", o.format}};
    if (!o.m.empty()) c["M"] = o.m;
    return c;
}

Result run(Options& o, json& config) {
    Result r;
    const RunOptions opt{o.workers};
    const std::uint64_t seed = *o.seed;

    if (o.command == "inner-approx") {
        if (o.set.empty() || o.dist.empty()) throw InputError("inner-approx needs --set and --dist");
        const auto ssrc = load(o.set), dsrc = load(o.dist);
        const auto mu = parse_with(dsrc, [](const json& j) { return io::distribution_from_json(j); });
        const auto b = parse_with(ssrc, [](const json& j) { return io::set_from_json(j); });
        const auto k = inner_approx(b, mu, o.eps);
        const double mb = measure_of(b, mu), mk = measure_of(k, mu);
        config["set"] = io::to_json(b);
        config["dist"] = io::to_json(mu);
        config["eps"] = o.eps;
        r.report = {{"K", io::to_json(k)}, {"measure_B", mb}, {"measure_K", mk}, {"deficit", mb - mk}};
        r.csv = "eps,measure_B,measure_K,deficit\n" + io::detail::num(o.eps) + "," + io::detail::num(mb) + "," +
                io::detail::num(mk) + "," + io::detail::num(mb - mk) + "\n";
        return r;
    }

    const auto rho = load_rho(o.rho_path);
    config["rho"] = io::to_json(rho);

    if (o.command == "sample") {
        const auto a = realize_array(rho, seed, o.k);
        config["k"] = o.k;
        r.report = io::edge_list_json(a);
        r.csv = io::edge_list_csv(a);
        return r;
    }
    if (o.command == "definetti") {
        if (o.bins == 0) throw InputError("--bins must be positive");
        std::vector<double> edges(o.bins + 1);
        for (std::size_t i = 0; i <= o.bins; ++i) edges[i] = static_cast<double>(i) / static_cast<double>(o.bins);
        const auto h = frequency_limit_histogram(rho, o.length, o.n, seed, edges, opt);
        config["L"] = o.length;
        config["bins"] = o.bins;
        r.report = io::to_json(h);
        r.csv = io::to_csv(h);
        return r;
    }

    const auto h = load_event(o.event_path, rho);
    config["event"] = io::to_json(h);

    if (o.command == "estimate") {
        const auto e = estimate_direct(rho, h, o.n, seed, opt);
        r.report = io::to_json(e);
        r.csv = io::to_csv(e);
    } else if (o.command == "empirical") {
        const auto e = estimate_empirical(rho, h, single_m(o), o.n, seed, o.reuse_array, opt);
        config["reuse_array"] = o.reuse_array;
        r.report = io::to_json(e);
        r.csv = io::to_csv(e);
    } else if (o.command == "converge") {
        if (o.m.empty()) throw InputError("converge needs an -M schedule");
        const auto t = convergence_harness(rho, h, o.m, o.n, seed, opt);
        for (const auto& row : t.rows) r.inconsistent |= !row.degenerate && std::abs(row.z) > kVerdictThreshold;
        r.report = io::to_json(t);
        r.csv = io::to_csv(t);
    } else if (o.command == "test-exch") {
        const auto s = h.vertex_count();
        if (o.f1.empty()) o.f1 = default_map(s, 0);
        if (o.f2.empty()) o.f2 = default_map(s, s);
        config["f1"] = o.f1;
        config["f2"] = o.f2;
        const auto t = exchangeability_test(rho, h, o.f1, o.f2, o.n, seed, o.workers);
        r.inconsistent = t.verdict == Verdict::Inconsistent;
        r.report = io::to_json(t);
        r.csv = io::to_csv(t);
    } else if (o.command == "test-dissoc") {
        const auto h2 = o.event2_path.empty() ? h : load_event(o.event2_path, rho);
        if (o.f1.empty()) o.f1 = default_map(h.vertex_count(), 0);
        if (o.f2.empty()) o.f2 = default_map(h2.vertex_count(), h.vertex_count());
        config["event2"] = io::to_json(h2);
        config["f1"] = o.f1;
        config["f2"] = o.f2;
        const auto t = dissociation_test(rho, h, h2, o.f1, o.f2, o.n, seed, opt);
        r.inconsistent = t.verdict == Verdict::Inconsistent;
        r.report = io::to_json(t);
        r.csv = io::to_csv(t);
    } else if (o.command == "second-moment") {
        const auto s = second_moment_diag(rho, h, single_m(o), o.blocks, o.n, seed, opt);
        config["blocks"] = o.blocks;
        r.report = io::to_json(s);
        r.csv = io::to_csv(s);
    } else if (o.command == "distill") {
        const auto a = realize_array(rho, derive_seed(seed, 0x73616d706c65, 0), o.k);
        const auto est = estimate_block_rho(a, o.blocks);
        const auto t = resample_and_compare(est, a, h, o.n, seed, o.workers);
        config["k"] = o.k;
        config["blocks"] = o.blocks;
        r.inconsistent = t.verdict == Verdict::Inconsistent;
        r.report = {{"block_estimate", io::to_json(est)}, {"comparison", io::to_json(t)}};
        r.csv = io::to_csv(est) + "\n" + io::to_csv(t);
    }
    return r;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError(path + ": cannot write file");
    out << text;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulate exchangeable random arrays from latent-variable representations."};
    app.require_subcommand(1);
    Options o;

    struct Command {
        const char* name;
        const char* help;
        bool event, m, maps, event2, blocks, length, k, inner, reuse;
    };
    const std::vector<Command> commands{
        {"sample", "realize an array and write its edge list", false, false, false, false, false, false, true, false, false},
        {"estimate", "direct Monte Carlo estimate of P(event)", true, false, false, false, false, false, false, false, false},
        {"empirical", "estimate from a random map into one realized array", true, true, false, false, false, false, false, false, true},
        {"converge", "check the sampling identity across an M schedule", true, true, false, false, false, false, false, false, false},
        {"test-exch", "compare the event under two injective maps", true, false, true, false, false, false, false, false, false},
        {"test-dissoc", "compare a joint event with its product over disjoint ranges", true, false, true, true, false, false, false, false, false},
        {"second-moment", "within- versus across-realization variance of block frequencies", true, true, false, false, true, false, false, false, false},
        {"definetti", "histogram of the frequency limit of a 1-array", false, false, false, false, false, true, false, false, false},
        {"inner-approx", "compact inner approximation of a set under a distribution", false, false, false, false, false, false, false, true, false},
        {"distill", "block-estimate rho from a realized graph and resample", true, false, false, false, true, false, true, false, false},
    };
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        sub->callback([&o, name = std::string(c.name)] { o.command = name; });
        if (!c.inner) sub->add_option("--rho", o.rho_path, "rho spec JSON file")->required();
        if (c.event) sub->add_option("--event", o.event_path, "event hypergraph JSON file")->required();
        sub->add_option("-N", o.n, "replicates")->check(CLI::PositiveNumber);
        if (c.m) sub->add_option("-M", o.m, "index bound, or a comma-separated schedule")->delimiter(',')->required();
        sub->add_option("--seed", o.seed, "master seed")->required();
        sub->add_option("--workers", o.workers, "worker threads; output does not depend on it")->check(CLI::PositiveNumber);
        sub->add_option("--out", o.out, "report path (default stdout)");
        sub->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        sub->add_flag("--assert", o.assert_verdict, "exit 3 on an inconsistent verdict");
        sub->add_flag("--no-timestamp", o.no_timestamp, "omit the timestamp field");
        if (c.maps) {
            sub->add_option("--f1", o.f1, "first injective map, comma-separated")->delimiter(',');
            sub->add_option("--f2", o.f2, "second injective map, comma-separated")->delimiter(',');
        }
        if (c.event2) sub->add_option("--event2", o.event2_path, "second event (default: --event)");
        if (c.blocks) sub->add_option("--blocks", o.blocks, "number of blocks")->check(CLI::PositiveNumber);
        if (c.length) {
            sub->add_option("-L", o.length, "sequence length")->check(CLI::PositiveNumber);
            sub->add_option("--bins", o.bins, "equal-width bins on [0, 1]")->check(CLI::PositiveNumber);
        }
        if (c.k) sub->add_option("-k", o.k, "index bound of the realized array")->check(CLI::PositiveNumber);
        if (c.inner) {
            sub->add_option("--set", o.set, "SetExpr JSON file or inline JSON")->required();
            sub->add_option("--dist", o.dist, "distribution JSON file or inline JSON")->required();
            sub->add_option("--eps", o.eps, "measure budget")->check(CLI::PositiveNumber);
        }
        if (c.reuse) sub->add_flag("--reuse-array", o.reuse_array, "share one realized array across replicates");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        json config = config_json(o);
        const auto result = run(o, config);
        json report{{"schema", io::kSchemaVersion}, {"config", config}, {"result", result.report}};
        if (!o.no_timestamp) report["timestamp"] = timestamp();
        if (o.format == "csv") {
            // CSV stays plot-ready; the replayable report goes next to it.
            write_text(o.out, result.csv);
            if (!o.out.empty()) write_text(o.out + ".json", report.dump(2) + "\n");
        } else {
            write_text(o.out, report.dump(2) + "\n");
        }
        if (o.assert_verdict && result.inconsistent) {
            std::cerr << "exarray: inconsistent verdict\n";
            return kExitAssert;
        }
        return 0;
    } catch (const InputError& e) {
        std::cerr << e.what() << "\n";
        return kExitInput;
    } catch (const Error& e) {
        std::cerr << "exarray: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "exarray: internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
