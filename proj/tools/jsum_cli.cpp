#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "jsum/densechain.hpp"
#include "jsum/estimates.hpp"
#include "jsum/extraction.hpp"
#include "jsum/jnorm.hpp"
#include "jsum/projections.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kOracleLimit = 16;

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, sep)) out.push_back(tok);
    return out;
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    for (const auto& tok : split(s, ',')) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw config_error("cannot parse number '" + tok + "'");
        }
    }
    return out;
}

/// Builtin chain addressable by name string:
///   james:N | lpn:p1,p2,..:dims | random:seed:N:maxdim
jsum::ChainPtr builtin_chain(const std::string& name, double q) {
    const auto parts = split(name, ':');
    try {
        if (parts.at(0) == "james") return jsum::james_chain(std::stoi(parts.at(1)), q);
        if (parts.at(0) == "lpn")
            return jsum::lpn_chain(parse_doubles(parts.at(1)), std::stoi(parts.at(2)), q);
        if (parts.at(0) == "random")
            return jsum::random_chain(std::stoull(parts.at(1)), std::stoi(parts.at(2)),
                                      std::stoi(parts.at(3)), q);
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    } catch (const std::out_of_range&) {
        throw config_error("malformed chain name '" + name + "'");
    }
    throw config_error("unknown builtin chain '" + name + "'");
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("bad JSON in ") + path + ": " + e.what());
    }
}

jsum::ChainPtr resolve_chain(const std::string& chain_name,
                             const std::string& config_path, double q) {
    if (!chain_name.empty()) return builtin_chain(chain_name, q);
    if (!config_path.empty()) {
        auto j = load_json(config_path);
        const auto& jc = j.contains("chain") ? j.at("chain") : j;
        try {
            if (jc.is_string()) return builtin_chain(jc.get<std::string>(), q);
            return jsum::Chain::from_json(jc);
        } catch (const std::exception& e) {
            throw config_error(e.what());
        }
    }
    throw config_error("no chain given (use --chain or --config)");
}

jsum::JVector resolve_vector(const jsum::ChainPtr& chain, const std::string& xs,
                             const std::string& tail) {
    const jsum::Tail t = tail == "ec" ? jsum::Tail::eventually_constant
                                      : jsum::Tail::zero;
    try {
        const auto vals = parse_doubles(xs);
        Eigen::VectorXd coords(static_cast<Eigen::Index>(vals.size()));
        for (std::size_t i = 0; i < vals.size(); ++i)
            coords(static_cast<Eigen::Index>(i)) = vals[i];
        return jsum::from_coords(chain, coords, t);
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }
}

nlohmann::json report_header(const jsum::ChainPtr& chain, std::uint64_t seed) {
    return {{"artifact_version", kVersion},
            {"generator", jsum::Rng::kName},
            {"seed", seed},
            {"chain_hash", chain ? chain->hash() : 0}};
}

nlohmann::json cert_json(const jsum::NormCertificate& c) {
    return {{"value", c.value},
            {"witness", c.witness.indices},
            {"rho_value", c.rho_value}};
}

void emit(const nlohmann::json& j, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) throw config_error("cannot write " + out_path);
        out << j.dump(2) << "\n";
    }
}

int cmd_norm(const std::string& chain_name, const std::string& config,
             const std::string& xs, const std::string& tail, double q,
             bool with_oracle, const std::string& out_path) {
    auto chain = resolve_chain(chain_name, config, q);
    std::string xv = xs;
    if (xv.empty() && !config.empty()) {
        auto j = load_json(config);
        if (j.contains("x")) {
            std::ostringstream os;
            bool first = true;
            for (const auto& v : j.at("x")) {
                if (!first) os << ",";
                os << v.get<double>();
                first = false;
            }
            xv = os.str();
        }
    }
    if (xv.empty()) throw config_error("no vector given (use --x)");
    auto x = resolve_vector(chain, xv, tail);
    if (with_oracle && chain->length() > kOracleLimit)
        throw config_error("oracle refused: chain length " +
                           std::to_string(chain->length()) + " beyond limit " +
                           std::to_string(kOracleLimit));
    nlohmann::json j;
    j["header"] = report_header(chain, 0);
    const auto dp = jsum::jnorm(x);
    j["jnorm"] = cert_json(dp);
    if (with_oracle) {
        const auto oracle = jsum::jnorm_oracle(x, kOracleLimit);
        j["oracle"] = cert_json(oracle);
        j["difference"] = std::abs(dp.value - oracle.value);
    }
    emit(j, out_path);
    return 0;
}

int cmd_project(const std::string& chain_name, const std::string& config,
                const std::string& xs, const std::string& tail, double q,
                const std::string& proj, const std::string& out_path) {
    auto chain = resolve_chain(chain_name, config, q);
    auto x = resolve_vector(chain, xs, tail);
    nlohmann::json jp;
    try {
        jp = nlohmann::json::parse(proj);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("bad projection spec: ") + e.what());
    }
    jsum::JVector y = x;
    try {
        if (jp.contains("P")) {
            const auto& p = jp.at("P");
            y = p_interval(x, jsum::IntervalI::closed(p.at("lo"), p.at("hi")));
        } else if (jp.contains("QA")) {
            y = q_set(x, jsum::IndexSetA(jp.at("QA").get<std::vector<int>>(),
                                         chain->length()));
        } else if (jp.contains("T")) {
            const auto& t = jp.at("T");
            y = t_block(x, t.at("nk"), t.at("nnext"));
        } else {
            throw config_error("projection spec must contain P, QA or T");
        }
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    } catch (const std::out_of_range& e) {
        throw config_error(e.what());
    } catch (const nlohmann::json::exception& e) {
        throw config_error(e.what());
    }
    nlohmann::json j;
    j["header"] = report_header(chain, 0);
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto& b : y.blocks) {
        nlohmann::json arr = nlohmann::json::array();
        for (Eigen::Index i = 0; i < b.size(); ++i) arr.push_back(b(i));
        blocks.push_back(arr);
    }
    j["result"] = blocks;
    j["input_jnorm"] = jsum::jnorm(x).value;
    j["result_jnorm"] = jsum::jnorm(y).value;
    emit(j, out_path);
    return 0;
}

int cmd_suite(const std::string& chain_name, const std::string& config, double q,
              int trials, std::uint64_t seed, const std::string& out_path) {
    auto chain = resolve_chain(chain_name, config, q);
    auto report = jsum::run_suite(chain, trials, seed);
    nlohmann::json j;
    j["header"] = report_header(chain, seed);
    j["suite"] = report.to_json();
    emit(j, out_path.empty() ? "" : out_path + ".json");
    if (!out_path.empty()) {
        std::ofstream csv(out_path + ".csv");
        if (!csv) throw config_error("cannot write " + out_path + ".csv");
        csv << report.to_csv();
    }
    std::cerr << "suite: " << report.total() << " checks, " << report.failures()
              << " failures\n";
    return report.failures() == 0 ? 0 : 1;
}

int cmd_extract(const std::string& chain_name, const std::string& config,
                const std::string& subspace, double q, int k_max,
                const std::string& out_path) {
    auto chain = resolve_chain(chain_name, config, q);
    jsum::SubspaceM M;
    if (!subspace.empty()) {
        const auto parts = split(subspace, ':');
        if (parts.at(0) == "skipped") {
            int count = 0;
            try {
                count = std::stoi(parts.at(1));
            } catch (const std::exception&) {
                throw config_error("malformed subspace spec '" + subspace + "'");
            }
            if (5 * count > chain->length())
                throw config_error("chain too short for " + std::to_string(count) +
                                   " skipped blocks");
            std::vector<jsum::JVector> basis;
            jsum::Rng rng(101);
            for (int b = 1; b <= count; ++b) {
                auto v = jsum::zero_vector(chain);
                for (int m = 5 * b - 3; m <= 5 * b - 1; ++m)
                    for (Eigen::Index i = 0; i < v.block(m).size(); ++i)
                        v.block(m)(i) = rng.normal();
                v *= 1.0 / jsum::jnorm(v).value;
                basis.push_back(std::move(v));
            }
            M = jsum::make_subspace(chain, std::move(basis));
        } else {
            throw config_error("unknown subspace generator '" + parts.at(0) + "'");
        }
    } else if (!config.empty()) {
        auto j = load_json(config);
        if (!j.contains("basis")) throw config_error("config has no subspace basis");
        std::vector<jsum::JVector> basis;
        for (const auto& row : j.at("basis")) {
            Eigen::VectorXd coords(static_cast<Eigen::Index>(row.size()));
            for (std::size_t i = 0; i < row.size(); ++i)
                coords(static_cast<Eigen::Index>(i)) = row.at(i).get<double>();
            basis.push_back(jsum::from_coords(chain, coords));
        }
        try {
            M = jsum::make_subspace(chain, std::move(basis));
        } catch (const std::invalid_argument& e) {
            throw config_error(e.what());
        }
    } else {
        throw config_error("no subspace given (use --subspace or --config)");
    }

    jsum::ExtractionOptions opts;
    opts.k_max = k_max;
    nlohmann::json j;
    j["header"] = report_header(chain, 0);
    try {
        auto B = jsum::select_sequence(M, opts);
        jsum::attach_functionals(B);
        auto P = jsum::small_perturbation(B);
        j["block_system"] = B.to_json();
        j["smallness_sum"] = P.smallness_sum;
        emit(j, out_path);
        return 0;
    } catch (const jsum::extraction_error& e) {
        j["error"] = {{"step", e.step()},
                      {"achieved", e.achieved()},
                      {"threshold", e.threshold()},
                      {"message", e.what()}};
        emit(j, out_path);
        std::cerr << e.what() << "\n";
        return 1;
    }
}

int cmd_dense(const std::string& config, int samples, std::uint64_t seed,
              bool certificate, const std::string& out_path) {
    if (config.empty()) throw config_error("dense requires --config");
    jsum::DecompositionSpec spec;
    try {
        spec = jsum::DecompositionSpec::from_json(load_json(config));
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }
    auto reports = jsum::check_splitting(spec, samples, seed, certificate);
    int failures = 0;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) {
        if (!r.pass) ++failures;
        arr.push_back({{"check", r.name},
                       {"lhs", r.lhs},
                       {"rhs", r.rhs},
                       {"margin", r.margin},
                       {"pass", r.pass},
                       {"instance", r.instance}});
    }
    nlohmann::json j;
    j["header"] = report_header(jsum::build_dense(spec), seed);
    j["checks"] = arr;
    j["failures"] = failures;
    emit(j, out_path);
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"J-sum laboratory: norms, projections, property suites, "
                 "block extraction and dense-chain experiments"};
    app.require_subcommand(1);

    std::string chain_name, config, xs, tail = "zero", proj, subspace, out_path;
    double q = 2.0;
    int trials = 100, samples = 100, k_max = 6;
    std::uint64_t seed = 1;
    bool with_oracle = false, certificate = true;

    auto add_common = [&](CLI::App* sub, bool with_chain = true) {
        if (with_chain) sub->add_option("--chain", chain_name, "builtin chain name");
        sub->add_option("--config", config, "JSON config path");
        sub->add_option("--q", q, "outer exponent");
        sub->add_option("--out", out_path, "output path");
    };

    auto* norm = app.add_subcommand("norm", "evaluate the J-norm");
    add_common(norm);
    norm->add_option("--x", xs, "vector, comma-separated coordinates");
    norm->add_option("--tail", tail, "tail convention: zero | ec");
    norm->add_flag("--oracle", with_oracle, "also run the brute-force oracle");

    auto* project = app.add_subcommand("project", "apply a projection");
    add_common(project);
    project->add_option("--x", xs, "vector, comma-separated coordinates")->required();
    project->add_option("--tail", tail, "tail convention: zero | ec");
    project->add_option("--proj", proj, "projection spec JSON")->required();

    auto* suite = app.add_subcommand("suite", "run the property-check suite");
    add_common(suite);
    suite->add_option("--trials", trials, "number of randomized trials");
    suite->add_option("--seed", seed, "random seed");

    auto* extract = app.add_subcommand("extract", "run the block extraction");
    add_common(extract);
    extract->add_option("--subspace", subspace, "subspace generator, e.g. skipped:8");
    extract->add_option("--kmax", k_max, "number of blocks to extract");

    auto* dense = app.add_subcommand("dense", "dense-chain splitting experiment");
    add_common(dense, false);
    dense->add_option("--samples", samples, "number of random samples");
    dense->add_option("--seed", seed, "random seed");
    dense->add_flag("--certificate,!--no-certificate", certificate,
                    "check the embedding norm certificate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (norm->parsed())
            return cmd_norm(chain_name, config, xs, tail, q, with_oracle, out_path);
        if (project->parsed())
            return cmd_project(chain_name, config, xs, tail, q, proj, out_path);
        if (suite->parsed())
            return cmd_suite(chain_name, config, q, trials, seed, out_path);
        if (extract->parsed())
            return cmd_extract(chain_name, config, subspace, q, k_max, out_path);
        if (dense->parsed())
            return cmd_dense(config, samples, seed, certificate, out_path);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
