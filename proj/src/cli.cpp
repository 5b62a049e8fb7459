#include "symadex/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "symadex/attack.hpp"
#include "symadex/io.hpp"
#include "symadex/synthesis.hpp"
#include "symadex/theory.hpp"

namespace symadex::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> config_arguments(const std::string& text) {
    std::vector<std::string> args;
    std::istringstream in(text);
    std::string line;
    std::size_t number = 0;
    auto trim = [](std::string s) {
        const auto first = s.find_first_not_of(" \t\r");
        if (first == std::string::npos) return std::string{};
        return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
    };
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("config line " + std::to_string(number) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ParseError("config line " + std::to_string(number) + ": empty key");
        args.push_back("--" + key);
        args.push_back(trim(line.substr(eq + 1)));
    }
    return args;
}

namespace {

// Options shared by the commands that pose an adversarial query.
struct QueryOptions {
    std::string network;
    std::string input;
    std::string input_vec;
    int target = -1;
    int label = -1;
    double eps = 0.0;
};

void add_query_options(CLI::App& cmd, QueryOptions& q) {
    cmd.add_option("--network", q.network, "network file (relu-ffn v1)")->required();
    cmd.add_option("--input", q.input, "file holding x_o as comma separated values");
    cmd.add_option("--input-vec", q.input_vec, "x_o inline, e.g. \"0.1,0.2\"");
    cmd.add_option("--target", q.target, "adversarial target label")->required();
    cmd.add_option("--label", q.label, "correct label (default: the network's prediction at x_o)");
    cmd.add_option("--eps", q.eps, "L-infinity radius")->required();
}

LabeledQuery make_query(const QueryOptions& opts, const Network& net) {
    if (opts.input.empty() == opts.input_vec.empty()) throw ParseError("give exactly one of --input and --input-vec");
    LabeledQuery q;
    q.x_o = opts.input.empty() ? parse_vector(opts.input_vec) : parse_vector(read_text_file(opts.input));
    if (q.x_o.size() != net.input_dim())
        throw ParseError("input has " + std::to_string(q.x_o.size()) + " values, network expects " +
                         std::to_string(net.input_dim()));
    q.y_t = opts.target;
    q.y_c = opts.label >= 0 ? opts.label : argmax(evaluate(net, q.x_o));
    q.epsilon = opts.eps;
    try {
        q.validate(net);
    } catch (const DimensionError& e) {
        throw ParseError(e.what());
    }
    return q;
}

Network read_network(const std::string& path) {
    try {
        return load_network(path);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

std::set<std::string> parse_emit(const std::string& text) {
    std::set<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        if (item != "region" && item != "map" && item != "log") throw ParseError("unknown --emit item '" + item + "'");
        out.insert(item);
    }
    return out;
}

struct SynthesizeOptions {
    QueryOptions query;
    std::string relaxation = "triangle";
    std::size_t s_plus = 400;
    std::size_t s_minus = 256;
    int t_max = 20;
    int period = 5;
    std::size_t history = 5;
    std::uint64_t seed = 0;
    int steps = 40;
    std::string out = ".";
    std::string emit = "region,map,log";
};

int cmd_synthesize(const SynthesizeOptions& o, std::ostream& out, std::ostream& err) {
    const Network net = read_network(o.query.network);
    const LabeledQuery q = make_query(o.query, net);
    const std::set<std::string> emit = parse_emit(o.emit);
    SynthesisConfig cfg;
    cfg.kind = parse_relaxation_kind(o.relaxation);
    cfg.s_plus = o.s_plus;
    cfg.s_minus = o.s_minus;
    cfg.t_max = o.t_max;
    cfg.period = o.period;
    cfg.history = o.history;
    cfg.seed = o.seed;
    cfg.attack.steps = o.steps;
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw ParseError(e.what());
    }

    RegionReport report;
    try {
        report = synthesize(net, q, cfg);
    } catch (const NoAttacks& e) {
        err << "symadex: " << e.what() << "\n";
        out << json{{"command", "synthesize"}, {"verified", false}, {"error", e.what()}}.dump() << "\n";
        return kNoAttacks;
    }

    const fs::path dir(o.out);
    fs::create_directories(dir);
    json summary = {{"command", "synthesize"},
                    {"verified", report.verified},
                    {"margin", report.margin},
                    {"cuts", report.cuts},
                    {"shrunk", report.shrunk},
                    {"attacks", report.attacks.size()},
                    {"log10_under", report.under.log10_count},
                    {"log10_over", report.over.log10_count}};
    if (!report.failure.empty()) summary["failure"] = report.failure;

    if (emit.count("region")) {
        RegionMeta meta;
        meta.x_o = q.x_o;
        meta.target = q.y_t;
        meta.epsilon = q.epsilon;
        meta.method = std::string(to_string(cfg.kind));
        meta.verified = report.verified;
        meta.margin = report.margin;
        meta.log10_under = report.under.log10_count;
        meta.log10_over = report.over.log10_count;
        save_region(dir / "region.json", report.region, meta);
        summary["region"] = (dir / "region.json").string();
    }
    if (emit.count("map")) {
        const Eigen::VectorXi widths = sensitivity_map(report.under);
        const Eigen::Index rows = grid_rows(widths.size());
        write_file_atomic(dir / "map.csv", format_map_csv(widths, rows));
        write_file_atomic(dir / "map.pgm", format_map_pgm(widths, rows));
    }
    if (emit.count("log")) {
        std::string text;
        char line[160];
        for (const IterationLog& entry : report.trace) {
            std::snprintf(line, sizeof line, "t=%d method=%s margin=%.6f negatives=%zu positives=%zu\n", entry.t,
                          std::string(to_string(entry.method)).c_str(), entry.margin, entry.negatives, entry.positives);
            text += line;
        }
        std::snprintf(line, sizeof line, "final verified=%d shrunk=%d theta=%.6f margin=%.6f cuts=%zu\n",
                      int(report.verified), int(report.shrunk), report.theta, report.margin, report.cuts);
        text += line;
        write_file_atomic(dir / "log.txt", text);
    }
    out << summary.dump() << "\n";
    return report.verified ? kVerified : kUnverified;
}

struct VerifyOptions {
    std::string region;
    std::string network;
    int target = -1;
    std::string relaxation;
};

int cmd_verify(const VerifyOptions& o, std::ostream& out) {
    const Network net = read_network(o.network);
    RegionFile file;
    try {
        file = load_region(o.region);
    } catch (const ParseError& e) {
        throw ParseError(o.region + ": " + e.what());
    }
    const Eigen::Index target = o.target >= 0 ? o.target : file.meta.target;
    if (target < 0 || target >= net.output_dim()) throw ParseError("target label missing or out of range");
    if (file.region.dim() != net.input_dim()) throw ParseError("region dimension does not match the network");
    std::string kind_name = o.relaxation;
    if (kind_name.empty()) kind_name = file.meta.method.empty() ? "triangle" : file.meta.method;
    const RelaxationKind kind = parse_relaxation_kind(kind_name);
    const Verification v = verify_region(net, file.region, target, kind);
    char line[96];
    std::snprintf(line, sizeof line, "verified=%s margin=%.6f\n", v.verified ? "true" : "false", v.margin);
    out << line;
    out << json{{"command", "verify"}, {"verified", v.verified}, {"margin", v.margin}}.dump() << "\n";
    return v.verified ? kVerified : kUnverified;
}

struct AttackOptions {
    QueryOptions query;
    std::size_t s_plus = 400;
    std::uint64_t seed = 0;
    int steps = 40;
    std::string out = ".";
};

int cmd_attack(const AttackOptions& o, std::ostream& out) {
    const Network net = read_network(o.query.network);
    const LabeledQuery q = make_query(o.query, net);
    if (o.s_plus == 0) throw ParseError("--s-plus must be at least 1");
    AttackConfig cfg;
    cfg.steps = o.steps;
    const std::vector<Vector> points = collect_attacks(net, q, o.s_plus, o.seed, cfg);
    json summary = {{"command", "attack"}, {"attacks", points.size()}};
    if (points.empty()) {
        out << summary.dump() << "\n";
        return kNoAttacks;
    }
    const fs::path dir(o.out);
    fs::create_directories(dir);
    write_file_atomic(dir / "attacks.csv", format_points_csv(points));
    summary["file"] = (dir / "attacks.csv").string();
    out << summary.dump() << "\n";
    return kVerified;
}

struct TheoryOptions {
    int d = 3;
    double sigma = 0.5;
    double omega = 1.0;
    int m = 1;
    double v = 0.5;
    std::optional<double> V;
    double u = 1.0;
    std::size_t trials = 10000;
    std::uint64_t seed = 0;
};

int cmd_theory(const TheoryOptions& o, std::ostream& out) {
    theory::Instance inst{o.d, o.sigma, o.omega, o.m};
    try {
        inst.validate();
    } catch (const Error& e) {
        throw ParseError(e.what());
    }
    const double V = o.V.value_or(std::pow(o.v, o.m));
    const double delta = theory::delta_bound(inst);
    double single = 0.0;
    double region = 0.0;
    double progress = 0.0;
    try {
        single = theory::expected_samples_single(inst, o.v);
        region = theory::expected_samples_region(inst, V);
        progress = theory::expected_samples_progress(o.u, o.sigma, o.v);
    } catch (const Error& e) {
        throw ParseError(e.what());
    }

    // Monte Carlo only where a trial stays cheap
    constexpr double kMaxExpected = 1e6;
    json rows = json::array();
    char line[160];
    out << "quantity                 formula     empirical   rel.error\n";
    auto row = [&](const char* name, double formula, std::optional<double> empirical) {
        if (empirical) {
            const double rel = std::abs(*empirical - formula) / formula;
            std::snprintf(line, sizeof line, "%-24s %-11.2g %-11.4g %.2f%%\n", name, formula, *empirical, 100 * rel);
        } else {
            std::snprintf(line, sizeof line, "%-24s %-11.2g %-11s %s\n", name, formula, "-", "-");
        }
        out << line;
        json r = {{"quantity", name}, {"formula", formula}};
        if (empirical) r["empirical"] = *empirical;
        rows.push_back(r);
    };
    row("delta", delta, std::nullopt);
    std::optional<double> mc_single;
    if (o.trials > 0 && single * o.d < kMaxExpected)
        mc_single = theory::simulate_cut_chain(inst, o.v, o.trials, o.seed).mean();
    row("samples_single(v)", single, mc_single);
    row("samples_region(V,m)", region, inst.m == 1 ? mc_single : std::nullopt);
    std::optional<double> mc_progress;
    if (o.trials > 0 && progress < kMaxExpected)
        mc_progress = theory::simulate_progress_chain(o.u, o.sigma, o.v, o.trials, o.seed).mean();
    row("samples_progress(u,v)", progress, mc_progress);
    out << json{{"command", "theory"}, {"rows", rows}}.dump() << "\n";
    return kVerified;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Synthesis of verified adversarial input regions for ReLU networks", "symadex"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    std::string config_path;

    SynthesizeOptions syn;
    CLI::App* synthesize = app.add_subcommand("synthesize", "synthesize a verified adversarial region");
    add_query_options(*synthesize, syn.query);
    synthesize->add_option("--relaxation", syn.relaxation, "triangle or deeppoly");
    synthesize->add_option("--s-plus", syn.s_plus, "number of attacks");
    synthesize->add_option("--s-minus", syn.s_minus, "counterexamples per iteration");
    synthesize->add_option("--t-max", syn.t_max, "maximum number of cuts");
    synthesize->add_option("--period", syn.period, "iterations between sampling method changes");
    synthesize->add_option("--history", syn.history, "counterexample batches kept");
    synthesize->add_option("--seed", syn.seed, "random seed");
    synthesize->add_option("--steps", syn.steps, "attack steps");
    synthesize->add_option("--out", syn.out, "output directory");
    synthesize->add_option("--emit", syn.emit, "artifacts to write: region,map,log");

    VerifyOptions ver;
    CLI::App* verify = app.add_subcommand("verify", "verify a region file");
    verify->add_option("--region", ver.region, "region JSON")->required();
    verify->add_option("--network", ver.network, "network file")->required();
    verify->add_option("--target", ver.target, "target label (default: from the region file)");
    verify->add_option("--relaxation", ver.relaxation, "triangle or deeppoly");

    AttackOptions att;
    CLI::App* attack_cmd = app.add_subcommand("attack", "collect adversarial examples");
    add_query_options(*attack_cmd, att.query);
    attack_cmd->add_option("--s-plus", att.s_plus, "number of attacks");
    attack_cmd->add_option("--seed", att.seed, "random seed");
    attack_cmd->add_option("--steps", att.steps, "attack steps");
    attack_cmd->add_option("--out", att.out, "output directory");

    TheoryOptions th;
    CLI::App* theory_cmd = app.add_subcommand("theory", "closed forms and Monte Carlo checks");
    theory_cmd->add_option("--d", th.d, "dimension");
    theory_cmd->add_option("--sigma", th.sigma, "side of the adversarial box");
    theory_cmd->add_option("--omega", th.omega, "cosine similarity lower bound");
    theory_cmd->add_option("--m", th.m, "number of cuts");
    theory_cmd->add_option("--v", th.v, "volume kept by one cut");
    theory_cmd->add_option("--V", th.V, "volume kept by all cuts");
    theory_cmd->add_option("--u", th.u, "current cut position");
    theory_cmd->add_option("--trials", th.trials, "Monte Carlo trials");
    theory_cmd->add_option("--seed", th.seed, "random seed");

    for (CLI::App* cmd : {synthesize, verify, attack_cmd, theory_cmd})
        cmd->add_option("--config", config_path, "key=value file; flags override it");

    try {
        // config values go first so that later flags win
        std::vector<std::string> argv(args.begin() + std::min<std::size_t>(1, args.size()), args.end());
        for (std::size_t i = 0; i + 1 < argv.size(); ++i)
            if (argv[i] == "--config") {
                std::vector<std::string> extra = config_arguments(read_text_file(argv[i + 1]));
                argv.insert(argv.begin() + std::min<std::size_t>(1, argv.size()), extra.begin(), extra.end());
                break;
            }
        std::reverse(argv.begin(), argv.end());
        app.parse(std::move(argv));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : kInputError;
    } catch (const Error& e) {
        err << "symadex: " << e.what() << "\n";
        return kInputError;
    }

    try {
        if (*synthesize) return cmd_synthesize(syn, out, err);
        if (*verify) return cmd_verify(ver, out);
        if (*attack_cmd) return cmd_attack(att, out);
        return cmd_theory(th, out);
    } catch (const ParseError& e) {
        err << "symadex: " << e.what() << "\n";
        return kInputError;
    } catch (const InfeasibleRegion& e) {
        err << "symadex: " << e.what() << "\n";
        return kInputError;
    } catch (const fs::filesystem_error& e) {
        err << "symadex: " << e.what() << "\n";
        return kInputError;
    } catch (const Error& e) {
        // unreadable or unwritable files
        err << "symadex: " << e.what() << "\n";
        return kInputError;
    }
}

}  // namespace symadex::cli
