// Command-line front end: single explanations (`explain`), the two-arm
// simulation study (`study`), and ground-truth solves (`exact`).

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "fpshap/fpshap.hpp"

namespace {

using nlohmann::json;

struct CommonOptions {
  std::string data_path;
  std::string response;
  double split_fraction = 0.5;
  std::string synthetic;
  std::uint64_t coalitions = 0;
  int runs = 300;
  int replicates = 300;
  std::string methods = "symmetric,doubled-half";
  std::string baseline;
  std::string instances = "20";
  std::uint64_t seed = 42;
  double anchor_weight = fpshap::kDefaultAnchorWeight;
  std::string out;
  std::string format = "csv";
  std::string oracle = "regression";
  bool keep_runs = false;
  std::string config_file;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::stringstream ss(text);
  while (std::getline(ss, part, sep)) parts.push_back(part);
  return parts;
}

fpshap::SyntheticSpec parse_synthetic(const std::string& text) {
  fpshap::SyntheticSpec spec;
  bool have_p = false, have_rows = false;
  for (const std::string& kv : split(text, ',')) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw fpshap::ArgumentError("--synthetic expects k=v pairs, got '" + kv +
                                  "'");
    }
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    if (key == "p") {
      spec.p = std::stoi(value);
      have_p = true;
    } else if (key == "n") {
      spec.rows = std::stoll(value);
      have_rows = true;
    } else if (key == "noise") {
      spec.noise_sd = std::stod(value);
    } else if (key == "beta0") {
      spec.beta0 = std::stod(value);
    } else if (key == "split") {
      spec.split_fraction = std::stod(value);
    } else {
      throw fpshap::ArgumentError("--synthetic: unknown key '" + key + "'");
    }
  }
  if (!have_p || !have_rows) {
    throw fpshap::ArgumentError("--synthetic requires at least p=..,n=..");
  }
  return spec;
}

std::vector<fpshap::BootstrapMethod> parse_methods(const std::string& text) {
  std::vector<fpshap::BootstrapMethod> methods;
  if (text.empty() || text == "none") return methods;
  for (const std::string& name : split(text, ',')) {
    if (name == "symmetric") {
      methods.push_back(fpshap::BootstrapMethod::kSymmetric);
    } else if (name == "doubled-half") {
      methods.push_back(fpshap::BootstrapMethod::kDoubledHalf);
    } else {
      throw fpshap::ArgumentError(
          "unknown bootstrap method '" + name +
          "' (expected symmetric and/or doubled-half)");
    }
  }
  return methods;
}

// "20" -> first 20 explained rows; "3,7,9" -> those explain-split indices.
void parse_instances(const std::string& text, fpshap::StudyConfig& config) {
  const auto parts = split(text, ',');
  if (parts.size() == 1) {
    config.default_instance_count = std::stoi(parts[0]);
    if (config.default_instance_count < 1) {
      throw fpshap::ArgumentError("--instances count must be positive");
    }
    return;
  }
  for (const std::string& part : parts) {
    config.instances.push_back(std::stoll(part));
  }
}

fpshap::StudyConfig config_from_options(const CommonOptions& options) {
  fpshap::StudyConfig config;
  const bool have_csv = !options.data_path.empty();
  const bool have_synthetic = !options.synthetic.empty();
  if (have_csv == have_synthetic) {
    throw fpshap::ArgumentError(
        "exactly one of --data or --synthetic is required");
  }
  if (have_csv) {
    if (options.response.empty()) {
      throw fpshap::ArgumentError("--data requires --response <column>");
    }
    config.data = fpshap::CsvSource{options.data_path, options.response,
                                    options.split_fraction};
  } else {
    config.data = parse_synthetic(options.synthetic);
  }
  config.n_total = options.coalitions;
  config.runs = options.runs;
  config.replicates = options.replicates;
  config.methods = parse_methods(options.methods);
  if (!options.baseline.empty()) {
    if (options.baseline != "with-replacement") {
      throw fpshap::ArgumentError("--baseline accepts only 'with-replacement'");
    }
    config.with_replacement_baseline = true;
  }
  parse_instances(options.instances, config);
  config.seed = options.seed;
  config.anchor_weight = options.anchor_weight;
  config.oracle_kind = fpshap::parse_oracle_kind(options.oracle);
  config.keep_run_estimates = options.keep_runs;
  return config;
}

fpshap::StudyConfig config_from_json(const std::filesystem::path& path,
                                     std::string& out, std::string& format) {
  std::ifstream in(path);
  if (!in) throw fpshap::Error("cannot open config '" + path.string() + "'");
  const json doc = json::parse(in);
  fpshap::StudyConfig config;
  const json& data = doc.at("data");
  if (data.contains("csv")) {
    const json& csv = data.at("csv");
    config.data = fpshap::CsvSource{csv.at("path").get<std::string>(),
                                    csv.at("response").get<std::string>(),
                                    csv.value("split_fraction", 0.5)};
  } else if (data.contains("synthetic")) {
    const json& syn = data.at("synthetic");
    fpshap::SyntheticSpec spec;
    spec.p = syn.at("p").get<int>();
    spec.rows = syn.at("rows").get<Eigen::Index>();
    spec.noise_sd = syn.value("noise_sd", 0.0);
    spec.beta0 = syn.value("beta0", 1.0);
    spec.split_fraction = syn.value("split_fraction", 0.5);
    config.data = spec;
  } else {
    throw fpshap::ArgumentError("config: data must contain csv or synthetic");
  }
  config.n_total = doc.at("coalitions").get<std::uint64_t>();
  config.runs = doc.value("runs", 300);
  config.replicates = doc.value("replicates", 300);
  if (doc.contains("methods")) {
    config.methods.clear();
    for (const auto& name : doc.at("methods")) {
      const auto parsed = parse_methods(name.get<std::string>());
      config.methods.insert(config.methods.end(), parsed.begin(),
                            parsed.end());
    }
  }
  if (doc.value("baseline", std::string{}) == "with-replacement") {
    config.with_replacement_baseline = true;
  }
  if (doc.contains("instances")) {
    if (doc.at("instances").is_number_integer()) {
      config.default_instance_count = doc.at("instances").get<int>();
    } else {
      for (const auto& index : doc.at("instances")) {
        config.instances.push_back(index.get<Eigen::Index>());
      }
    }
  }
  config.seed = doc.value("seed", std::uint64_t{42});
  config.anchor_weight =
      doc.value("anchor_weight", fpshap::kDefaultAnchorWeight);
  config.oracle_kind = fpshap::parse_oracle_kind(
      doc.value("oracle", std::string{"regression"}));
  config.keep_run_estimates = doc.value("keep_run_estimates", false);
  out = doc.value("out", out);
  format = doc.value("format", format);
  return config;
}

void print_explanation(Eigen::Index instance,
                       const std::vector<std::string>& names, double phi0,
                       const Eigen::VectorXd& phi) {
  std::printf("instance %lld  (phi0 = %.6g, total = %.6g)\n",
              static_cast<long long>(instance), phi0, phi0 + phi.sum());
  for (Eigen::Index j = 0; j < phi.size(); ++j) {
    std::printf("  %-24s %12.6g\n", names[static_cast<std::size_t>(j)].c_str(),
                phi(j));
  }
}

int run_explain(const fpshap::StudyConfig& config) {
  const fpshap::StudyData data = fpshap::load_study_data(config);
  const auto results = fpshap::explain(config);
  for (const auto& result : results) {
    print_explanation(result.instance, data.dataset.feature_names,
                      result.explanation.phi0, result.explanation.phi);
    for (const auto& method : result.method_sd) {
      std::printf("  bootstrap %-13s (failed replicates: %d)\n",
                  fpshap::to_string(method.method).c_str(),
                  method.failed_replicates);
      for (Eigen::Index j = 0; j < method.sd.size(); ++j) {
        std::printf(
            "    sd %-21s %12.6g\n",
            data.dataset.feature_names[static_cast<std::size_t>(j)].c_str(),
            method.sd(j));
      }
    }
  }
  return 0;
}

int run_exact(const fpshap::StudyConfig& config) {
  const fpshap::StudyData data = fpshap::load_study_data(config);
  for (std::size_t i = 0; i < data.instance_indices.size(); ++i) {
    const auto explanation = fpshap::exact_shapley(
        *data.oracle,
        data.x_stars.row(static_cast<Eigen::Index>(i)).transpose(),
        config.anchor_weight);
    print_explanation(data.instance_indices[i], data.dataset.feature_names,
                      explanation.phi0, explanation.phi);
  }
  return 0;
}

int run_study_command(const fpshap::StudyConfig& config,
                      const std::string& out, const std::string& format) {
  const fpshap::StudyReport report = fpshap::run_study(config);
  const auto files =
      fpshap::emit_report(report, fpshap::parse_report_format(format), out);
  for (const auto& file : files) {
    std::printf("wrote %s\n", file.string().c_str());
  }
  for (const auto& method : report.methods) {
    std::printf("%s: mean failed replicates per run = %.4g of %d\n",
                fpshap::to_string(method.method).c_str(),
                method.mean_failed_replicates, report.replicates);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Shapley value estimation with stratified without-replacement coalition "
      "sampling and finite-population bootstrap uncertainty"};
  app.require_subcommand(1);

  CommonOptions options;
  const auto add_common = [&](CLI::App* cmd, bool with_sampling_options) {
    cmd->add_option("--data", options.data_path,
                    "CSV dataset (header row, numeric columns)");
    cmd->add_option("--response", options.response,
                    "response column name for --data");
    cmd->add_option("--split", options.split_fraction,
                    "train fraction for --data (default 0.5)");
    cmd->add_option("--synthetic", options.synthetic,
                    "synthetic data spec: p=..,n=..[,noise=..,beta0=..]");
    cmd->add_option("--instances", options.instances,
                    "explained instances: a count or a comma list of "
                    "explain-split indices (default 20)");
    cmd->add_option("--seed", options.seed, "master seed (default 42)");
    cmd->add_option("--anchor-weight", options.anchor_weight,
                    "weight pinning the empty/grand coalitions (default 1e6)");
    cmd->add_option("--oracle", options.oracle,
                    "contribution estimates: regression (per-coalition fits) "
                    "or marginal (exact, zero sampling variance)");
    cmd->add_option("--config", options.config_file,
                    "JSON config file replacing the flags above");
    if (with_sampling_options) {
      cmd->add_option("--coalitions", options.coalitions,
                      "coalition budget including the two anchors");
      cmd->add_option("--replicates", options.replicates,
                      "bootstrap replicates B (default 300)");
      cmd->add_option("--methods", options.methods,
                      "bootstrap methods: symmetric,doubled-half or none");
    }
  };

  CLI::App* explain_cmd =
      app.add_subcommand("explain", "one sampled explanation per instance");
  add_common(explain_cmd, true);

  CLI::App* study_cmd = app.add_subcommand(
      "study", "resampling study comparing bootstrap SDs to resampled SDs");
  add_common(study_cmd, true);
  study_cmd->add_option("--runs", options.runs,
                        "independent coalition samples R (default 300)");
  study_cmd->add_option("--baseline", options.baseline,
                        "additional comparison arm: with-replacement");
  study_cmd->add_option("--out", options.out,
                        "output directory (default fpshap-report)");
  study_cmd->add_option("--format", options.format,
                        "report format: csv or json (default csv)");
  study_cmd->add_flag("--keep-runs", options.keep_runs,
                      "also store per-run estimates");

  CLI::App* exact_cmd = app.add_subcommand(
      "exact", "ground-truth Shapley values by full enumeration");
  add_common(exact_cmd, false);

  CLI11_PARSE(app, argc, argv);

  try {
    std::string out = options.out.empty() ? "fpshap-report" : options.out;
    std::string format = options.format;
    fpshap::StudyConfig config;
    if (!options.config_file.empty()) {
      config = config_from_json(options.config_file, out, format);
    } else {
      config = config_from_options(options);
    }
    if (explain_cmd->parsed()) return run_explain(config);
    if (exact_cmd->parsed()) return run_exact(config);
    return run_study_command(config, out, format);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
