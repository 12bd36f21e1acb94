// seclab: batch driver over a model configuration.
//
//   seclab <validate|smooth|profile|flow|acs|floer|all> --config <path>
//          [--seed N] [--out DIR] [--tol-scale X]
//
// Exit codes: 0 all checks pass, 1 an invariant failed, 2 usage or
// configuration error.

#include "seclab/report.hpp"
#include "seclab/sector.hpp"
#include "seclab/suites.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

void usage() {
    std::cerr << "usage: seclab <validate|smooth|profile|flow|acs|floer|all> --config <path>\n"
                 "              [--seed N] [--out DIR] [--tol-scale X]\n";
}

struct Options {
    std::string command;
    std::string config_path;
    std::optional<uint64_t> seed;
    std::optional<std::string> out;
    std::optional<double> tol_scale;
};

std::optional<Options> parse(int argc, char** argv) {
    if (argc < 2) return std::nullopt;
    Options opt;
    opt.command = argv[1];
    const std::vector<std::string> commands = {"validate", "smooth", "profile", "flow",
                                               "acs",      "floer",  "all"};
    bool known = false;
    for (const auto& c : commands) known = known || c == opt.command;
    if (!known) return std::nullopt;
    for (int i = 2; i < argc; ++i) {
        const std::string arg = argv[i];
        auto next = [&]() -> std::optional<std::string> {
            if (i + 1 >= argc) return std::nullopt;
            return std::string(argv[++i]);
        };
        if (arg == "--config") {
            auto v = next();
            if (!v) return std::nullopt;
            opt.config_path = *v;
        } else if (arg == "--seed") {
            auto v = next();
            if (!v) return std::nullopt;
            opt.seed = std::stoull(*v);
        } else if (arg == "--out") {
            auto v = next();
            if (!v) return std::nullopt;
            opt.out = *v;
        } else if (arg == "--tol-scale") {
            auto v = next();
            if (!v) return std::nullopt;
            opt.tol_scale = std::stod(*v);
        } else {
            return std::nullopt;
        }
    }
    if (opt.config_path.empty()) return std::nullopt;
    return opt;
}

}  // namespace

int main(int argc, char** argv) {
    auto opt = parse(argc, argv);
    if (!opt) {
        usage();
        return 2;
    }

    nlohmann::json cfg;
    uint64_t seed = 1;
    double tol_scale = 1.0;
    std::string outdir = ".";
    try {
        std::ifstream in(opt->config_path);
        if (!in) throw seclab::construction_error("cannot open config file");
        in >> cfg;
        nlohmann::json model_json = cfg.contains("model") ? cfg.at("model") : cfg;
        if (model_json.is_string()) {
            const std::filesystem::path base =
                std::filesystem::path(opt->config_path).parent_path();
            std::ifstream mf(base / model_json.get<std::string>());
            if (!mf) throw seclab::construction_error("cannot open model file");
            mf >> model_json;
        }
        if (cfg.contains("seed")) seed = cfg.at("seed").get<uint64_t>();
        if (cfg.contains("tol_scale")) tol_scale = cfg.at("tol_scale").get<double>();
        if (cfg.contains("out")) outdir = cfg.at("out").get<std::string>();
        if (opt->seed) seed = *opt->seed;
        if (opt->tol_scale) tol_scale = *opt->tol_scale;
        if (opt->out) outdir = *opt->out;

        seclab::sector::SectorModel model = seclab::sector::model_from_json(model_json);
        std::filesystem::create_directories(outdir);
        seclab::suites::Context ctx(std::move(model));
        std::mt19937_64 rng(seed);

        std::vector<seclab::suites::SuiteReport> reports;
        const std::string& cmd = opt->command;
        reports.push_back(seclab::suites::run_validate(ctx, tol_scale));
        const bool validated = reports.back().pass();
        if (cmd == "validate") {
            for (const auto& c : reports.back().checks) {
                std::printf("%-40s %s  margin=%.6g\n", c.name.c_str(),
                            c.pass ? "PASS" : "FAIL", c.worst);
            }
            return validated ? 0 : 1;
        }
        if (!validated) {
            std::cerr << "model constants failed validation; run `seclab validate` for margins\n";
            return 1;
        }

        if (cmd == "smooth" || cmd == "all")
            reports.push_back(
                seclab::suites::run_smoothing(ctx.model.ledger().eps0, rng, tol_scale, outdir));
        if (cmd == "profile" || cmd == "all") {
            reports.push_back(seclab::suites::run_splitting(ctx, rng, tol_scale));
            reports.push_back(seclab::suites::run_end_profile(ctx, rng, tol_scale, outdir));
        }
        if (cmd == "flow" || cmd == "all")
            reports.push_back(seclab::suites::run_moser(ctx, rng, tol_scale, outdir));
        if (cmd == "acs" || cmd == "all") {
            reports.push_back(seclab::suites::run_acs(ctx, rng, tol_scale, outdir));
            reports.push_back(seclab::suites::run_lambda_sectorial(ctx, rng, tol_scale));
        }
        if (cmd == "floer" || cmd == "all")
            reports.push_back(seclab::suites::run_floer(ctx, rng, tol_scale, outdir));
        if (cmd == "all")
            reports.push_back(seclab::suites::run_negative_controls(ctx, rng, tol_scale));

        bool all_pass = true;
        nlohmann::ordered_json out;
        out["seed"] = seed;
        out["tol_scale"] = tol_scale;
        out["command"] = cmd;
        nlohmann::ordered_json suites_json = nlohmann::ordered_json::object();
        for (const auto& rep : reports) {
            suites_json[rep.name] = rep.to_json();
            all_pass = all_pass && rep.pass();
            for (const auto& c : rep.checks) {
                std::printf("[%s] %s :: %-42s worst=%.6g\n", c.pass ? "PASS" : "FAIL",
                            rep.name.c_str(), c.name.c_str(), c.worst);
            }
        }
        out["suites"] = suites_json;
        out["pass"] = all_pass;
        std::ofstream report_file(std::filesystem::path(outdir) / "report.json");
        report_file << out.dump(2) << "\n";
        return all_pass ? 0 : 1;
    } catch (const seclab::construction_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
