#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "usermodel/usermodel.hpp"

namespace {

using namespace usermodel;

void add_inputs(CLI::App* cmd, RunConfig& rc, bool sessions_required) {
  cmd->add_option("--data", rc.data, "dataset CSV")->required();
  cmd->add_option("--schema", rc.schema, "schema JSON")->required();
  auto* s = cmd->add_option("--sessions", rc.sessions, "sessions CSV");
  if (sessions_required) s->required();
}

void add_run_options(CLI::App* cmd, RunConfig& rc, std::string& config_path, std::vector<std::string>& sets,
                     std::vector<std::string>& models) {
  add_inputs(cmd, rc, true);
  cmd->add_option("--models", models, "comma-separated model names")->delimiter(',')->required();
  cmd->add_option("--seed", rc.seed, "base random seed");
  cmd->add_option("--config", config_path, "JSON config file");
  cmd->add_option("--set", sets, "config override key=value (repeatable)");
  cmd->add_option("--out", rc.out, "output directory");
  cmd->add_option("--jobs", rc.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--bins", rc.bins_out, "write the binning specs to this JSON file");
}

int finish_config(RunConfig& rc, const std::string& config_path, const std::vector<std::string>& sets,
                  bool seed_flag) {
  try {
    if (!config_path.empty()) rc.config = Config::from_json(read_json_file(config_path));
    for (const auto& s : sets) rc.config.set(s);
    if (!seed_flag) rc.seed = rc.config.get<std::uint64_t>("seed", rc.seed);
    rc.config.set("seed", rc.seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Real-time user models for next-interaction prediction and exploration-bias detection"};
  app.require_subcommand(1);

  RunConfig rc;
  std::string config_path;
  std::vector<std::string> sets;
  std::vector<std::string> models;

  auto* validate = app.add_subcommand("validate", "check dataset and session files");
  add_inputs(validate, rc, false);

  auto* bench = app.add_subcommand("bench", "replay sessions and score next-interaction predictions");
  add_run_options(bench, rc, config_path, sets, models);
  bench->add_option("--kappa", rc.kappas, "prediction set sizes")->delimiter(',');

  auto* bias = app.add_subcommand("bias", "emit per-step bias timelines");
  add_run_options(bias, rc, config_path, sets, models);
  bias->add_option("--groups", rc.groups, "attribute groups, e.g. location=lon+lat;type=type");

  SynthOptions synth_opts;
  auto* synth = app.add_subcommand("synth", "generate a dataset and biased sessions");
  synth->add_option("--n", synth_opts.n, "number of points");
  synth->add_option("--schema", synth_opts.schema, "schema JSON (built-in schema otherwise)");
  synth->add_option("--focus", synth_opts.focus, "planted focus, e.g. type=A;x=0.2:0.4");
  synth->add_option("--noise", synth_opts.noise, "probability an event ignores the focus");
  synth->add_option("--length", synth_opts.length, "events per session");
  synth->add_option("--sessions-count", synth_opts.sessions, "number of sessions");
  synth->add_option("--seed", synth_opts.seed, "random seed");
  synth->add_option("--out", synth_opts.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  rc.models = models;
  if (validate->parsed()) return cmd_validate(rc, std::cout, std::cerr);
  if (synth->parsed()) return cmd_synth(synth_opts, std::cout, std::cerr);
  auto* run = bench->parsed() ? bench : bias;
  if (const int code = finish_config(rc, config_path, sets, run->get_option("--seed")->count() > 0); code != kExitOk) {
    return code;
  }
  if (bench->parsed()) return cmd_bench(rc, std::cout, std::cerr);
  return cmd_bias(rc, std::cout, std::cerr);
}
