// fegtool: command-line front end over the feg C API.
//
//   fegtool <analysis> --corpus PATH [flags]   run one analysis into --out
//   fegtool synth --out DIR [--kind K]         write a synthetic corpus
//
// Settings are layered defaults < --config file < FEG_* environment <
// flags. Exit codes: 0 ok, 1 usage, 2 data, 3 internal.

#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "feg/feg.h"

namespace {

int exit_code(feg_status s) {
    switch (s) {
        case FEG_OK: return 0;
        case FEG_E_USAGE: return 1;
        case FEG_E_INTERNAL: return 3;
        default: return 2;
    }
}

struct Failure {
    feg_status status;
};

void check(feg_status s) {
    if (s != FEG_OK) throw Failure{s};
}

std::vector<std::string> config_keys() {
    char* raw = nullptr;
    check(feg_config_keys(&raw));
    std::vector<std::string> keys;
    std::istringstream in(raw);
    feg_free_string(raw);
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) keys.push_back(line);
    return keys;
}

const std::map<std::string, std::string>& flag_help() {
    static const std::map<std::string, std::string> help{
        {"corpus", "NDJSON corpus file"},
        {"concepts", "NDJSON concept tree sidecar"},
        {"embeddings", "directory of .vec embedding files"},
        {"out", "output directory"},
        {"report", "also write the ingest report JSON to this path"},
        {"window", "citation window X in years"},
        {"min-citations", "cohort: minimum citations within the window"},
        {"min-refs", "cohort: minimum references"},
        {"years", "cohort publication years A:B"},
        {"mode", "strict|relaxed"},
        {"group-by", "none|top_domain"},
        {"threads", "worker threads"},
        {"analyses", "comma-separated analyses run by 'report'"},
        {"words", "comma-separated title words for 'words'"},
        {"dedup-tokens", "collapse repeated tokens before averaging (true|false)"},
        {"abstract", "use abstract tokens for semantic distance when present (true|false)"},
        {"domain-depth", "deepest concept level used to break top-domain ties"},
        {"corpus-end-year", "last year covered by the corpus (default: latest paper)"},
        {"regress-split", "split longitudinal regressions at this year"},
    };
    return help;
}

struct AnalysisCommand {
    std::string name;
    std::string config_path;
    std::map<std::string, std::string> values;
};

int run_analysis(const AnalysisCommand& cmd) {
    feg_config* config = nullptr;
    feg_session* session = nullptr;
    try {
        check(feg_config_new(&config));
        if (!cmd.config_path.empty()) check(feg_config_load_file(config, cmd.config_path.c_str()));
        check(feg_config_apply_env(config, "FEG_"));
        for (const auto& [key, value] : cmd.values) check(feg_config_set(config, key.c_str(), value.c_str()));
        check(feg_config_validate(config));
        check(feg_session_open(config, &session));
        check(feg_session_run(session, cmd.name.c_str()));
        check(feg_session_finish(session));
    } catch (const Failure& f) {
        std::fprintf(stderr, "fegtool %s: %s\n", cmd.name.c_str(), feg_last_error());
        feg_session_close(session);
        feg_config_free(config);
        return exit_code(f.status);
    }
    feg_session_close(session);
    feg_config_free(config);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Foundation / Extension / Generalization citation analyses"};
    app.require_subcommand(1);

    static const std::vector<std::pair<std::string, std::string>> analyses{
        {"ingest", "validate the corpus; write ingest_report.json and store.jsonl"},
        {"feg", "per-paper F, E, G indices (feg.csv)"},
        {"disruption", "per-paper disruption terms (disruption.csv)"},
        {"domains", "original and top domains, cross-domain rates"},
        {"distances", "within-paper and cited-paper embedding distances"},
        {"series", "yearly means of F, E, G (series.csv + SVG charts)"},
        {"deciles", "F, E, G by disruption decile"},
        {"deltas", "relative deltas of citation-level metrics by citation type"},
        {"words", "title-word prevalence ratios"},
        {"regress", "OLS regressions of F, E, G"},
        {"report", "every analysis listed in --analyses"},
    };

    std::vector<std::string> keys;
    try {
        keys = config_keys();
    } catch (const Failure& f) {
        std::fprintf(stderr, "fegtool: %s\n", feg_last_error());
        return exit_code(f.status);
    }

    std::vector<AnalysisCommand> commands(analyses.size());
    std::vector<CLI::App*> subs;
    for (std::size_t a = 0; a < analyses.size(); ++a) {
        auto& cmd = commands[a];
        cmd.name = analyses[a].first;
        CLI::App* sub = app.add_subcommand(cmd.name, analyses[a].second);
        sub->add_option("--config", cmd.config_path, "key = value configuration file");
        for (const auto& key : keys) {
            auto it = flag_help().find(key);
            sub->add_option_function<std::string>(
                "--" + key, [&cmd, key](const std::string& v) { cmd.values[key] = v; },
                it == flag_help().end() ? key : it->second);
        }
        subs.push_back(sub);
    }

    std::string synth_kind = "archetype";
    std::string synth_out;
    std::string synth_years = "1990:2019";
    std::uint64_t synth_papers = 10000;
    std::uint64_t synth_seed = 42;
    int synth_boundary = 2005;
    bool synth_no_embeddings = false;
    CLI::App* synth = app.add_subcommand("synth", "write a deterministic synthetic corpus");
    synth->add_option("--kind", synth_kind, "archetype|two_era")->capture_default_str();
    synth->add_option("--papers", synth_papers, "number of papers")->capture_default_str();
    synth->add_option("--seed", synth_seed, "random seed")->capture_default_str();
    synth->add_option("--years", synth_years, "publication years A:B")->capture_default_str();
    synth->add_option("--boundary", synth_boundary, "era boundary year (two_era)")->capture_default_str();
    synth->add_flag("--no-embeddings", synth_no_embeddings, "skip embedding files");
    synth->add_option("--out", synth_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    if (synth->parsed()) {
        int first = 0, last = 0;
        char sep = 0;
        std::istringstream in(synth_years);
        if (!(in >> first >> sep >> last) || sep != ':') {
            std::fprintf(stderr, "fegtool synth: --years must be A:B\n");
            return 1;
        }
        const feg_status s = feg_synth_generate(synth_kind.c_str(), synth_papers, synth_seed, first, last, synth_boundary,
                                                synth_no_embeddings ? 0 : 1, synth_out.c_str());
        if (s != FEG_OK) std::fprintf(stderr, "fegtool synth: %s\n", feg_last_error());
        return exit_code(s);
    }
    for (std::size_t a = 0; a < subs.size(); ++a)
        if (subs[a]->parsed()) return run_analysis(commands[a]);
    return 1;
}
