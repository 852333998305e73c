#include <CLI11.hpp>

#include <iostream>

#include "smpa/bench.hpp"
#include "smpa/peers.hpp"
#include "smpa/tls.hpp"

#ifndef SMPA_FORCED_PROTOCOL
#define SMPA_FORCED_PROTOCOL ""
#endif

namespace {

int real_main(int argc, char** argv) {
    CLI::App app{"secure multi-party aggregation over Shamir shares"};
    app.require_subcommand(0, 1);

    // keygen subcommand: self-signed credentials + fingerprint on stdout
    auto* keygen = app.add_subcommand("keygen", "generate a key and self-signed certificate");
    std::string key_out, cert_out, cn = "smpa-peer";
    int days = 3650;
    keygen->add_option("--key", key_out, "private key output path (PEM)")->required();
    keygen->add_option("--cert", cert_out, "certificate output path (PEM)")->required();
    keygen->add_option("--cn", cn, "certificate common name");
    keygen->add_option("--days", days, "validity in days");

    std::string config_path, role_s, protocol_s, bench_op, costs_csv;
    bool sim = false, realtime = false;
    int sim_peers = 3, sim_privacy = 3, parallelism = 1000;
    std::uint64_t seed = 1;
    double latency_ms = 0.0;

    app.add_option("--config", config_path, "peer configuration file");
    app.add_option("--role", role_s, "input|privacy (overrides config)");
    app.add_option("--protocol", protocol_s, "addition|entropy|distinctcount|eventcorrelation");
    app.add_flag("--sim", sim, "run all peers in-process over the simulator");
    app.add_option("--peers", sim_peers, "simulator: number of input peers");
    app.add_option("--privacy", sim_privacy, "simulator: number of privacy peers");
    app.add_option("--seed", seed, "simulator: deterministic seed");
    app.add_option("--latency-ms", latency_ms, "simulator: injected per-message latency");
    app.add_option("--bench", bench_op, "benchmark one op: mult|equal|lessthan|all");
    app.add_option("--parallelism", parallelism, "benchmark: parallel ops per round batch");
    app.add_option("--verify-costs", costs_csv,
                   "measure cost formulas, write the CSV report to this path ('-' = stdout)");
    app.add_flag("--realtime", realtime, "input peer: pace windows by the wall clock");

    CLI11_PARSE(app, argc, argv);

    if (keygen->parsed()) {
        smpa::generate_credentials(key_out, cert_out, cn, days);
        std::cout << smpa::cert_fingerprint(cert_out) << "\n";
        return smpa::EXIT_OK;
    }

    if (!bench_op.empty()) {
        const int m = sim_privacy;
        for (const std::string op : {"mult", "equal", "lessthan"}) {
            if (bench_op != "all" && bench_op != op) continue;
            const double rate = smpa::throughput(op, parallelism, m, latency_ms, seed);
            std::cout << op << "/s\t" << static_cast<std::uint64_t>(rate) << "\t(m=" << m
                      << ", parallelism=" << parallelism << ", latency=" << latency_ms << "ms)\n";
        }
        return smpa::EXIT_OK;
    }

    if (!costs_csv.empty()) {
        const std::vector<smpa::FieldParams> fields = {smpa::find_prime(4, 2), smpa::find_prime(16, 3),
                                                       smpa::find_prime(31, 3)};
        const auto reports = smpa::verify_costs(fields, {3, 5, 7}, seed);
        if (costs_csv == "-") {
            smpa::write_cost_csv(std::cout, reports);
        } else {
            std::ofstream out(costs_csv);
            smpa::write_cost_csv(out, reports);
        }
        smpa::assert_costs(reports);
        return smpa::EXIT_OK;
    }

    if (config_path.empty()) {
        std::cerr << "error: --config is required\n";
        return smpa::EXIT_VALIDATION;
    }
    smpa::PeerConfig cfg = smpa::parse_config_file(config_path);
    const std::string forced = SMPA_FORCED_PROTOCOL;
    if (!forced.empty()) cfg.protocol = smpa::protocol_from_string(forced);
    if (!protocol_s.empty()) cfg.protocol = smpa::protocol_from_string(protocol_s);
    if (!role_s.empty()) {
        if (role_s == "input") cfg.role = smpa::Role::Input;
        else if (role_s == "privacy") cfg.role = smpa::Role::Privacy;
        else throw smpa::ValidationError("bad --role: " + role_s);
    }

    if (sim) {
        smpa::SimOptions opt;
        opt.n = sim_peers;
        opt.m = sim_privacy;
        opt.seed = seed;
        opt.latency.fixed_ms = latency_ms;
        return smpa::run_local_sim(cfg, opt);
    }
    if (cfg.role == smpa::Role::Input) return smpa::run_input_peer(cfg, realtime);
    return smpa::run_privacy_peer(cfg);
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return real_main(argc, argv);
    } catch (const smpa::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return smpa::EXIT_PROTOCOL;
    }
}
