#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "audit/errors.hpp"
#include "audit/metrics.hpp"
#include "audit/model_gateway.hpp"
#include "audit/parser.hpp"
#include "audit/prompt_engine.hpp"
#include "audit/runner.hpp"
#include "audit/util.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw audit::IoError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

int run_command(const std::string& config_path, const audit::RunOverrides& overrides) {
  audit::RunConfig config = audit::load_run_config(config_path);
  audit::apply_overrides(config, overrides);
  audit::RunResult result = audit::run_audit(config);
  std::cout << "wrote " << result.output_dir.string() << " ("
            << result.instances << " instances, " << result.excluded_rows
            << " excluded rows)\n";
  if (!result.content_error_counts.empty()) {
    std::cout << "content errors:";
    for (const auto& [kind, count] : result.content_error_counts) {
      std::cout << " " << kind << "=" << count;
    }
    std::cout << "\n";
  }
  return 0;
}

int metrics_command(const std::string& ref_path, const std::string& cand_path,
                    int k) {
  auto [ref, ref_report] = audit::parse_list(read_file(ref_path), k);
  auto [cand, cand_report] = audit::parse_list(read_file(cand_path), k);
  for (audit::Metric metric : audit::kAllMetrics) {
    auto score = audit::similarity_at_k(metric, ref, cand, k);
    std::cout << audit::metric_name(metric) << "@" << k << " ";
    if (score) {
      std::cout << audit::format_fixed(*score);
    } else {
      std::cout << "undefined";
    }
    std::cout << "\n";
  }
  return 0;
}

// Recovers the anchor from the audit's template shape, so every condition for
// the same anchor shares one base list exactly like the in-process mock. Falls
// back to the full prompt for free-form text.
std::string anchor_from_prompt(const std::string& text) {
  auto between = [&](const std::string& open, const std::string& close,
                     std::string& out) {
    size_t start = text.find(open);
    if (start == std::string::npos) return false;
    start += open.size();
    size_t end = text.find(close, start);
    if (end == std::string::npos) return false;
    out = text.substr(start, end - start);
    return true;
  };
  std::string anchor;
  if (between(" fan of ", ". Please provide", anchor)) return anchor;
  if (between(" de ", ". Veuillez fournir", anchor)) return anchor;
  return text;
}

audit::PromptInstance instance_for_prompt(const std::string& text,
                                          const audit::MockModelConfig& mock,
                                          int k) {
  audit::PromptInstance instance;
  instance.anchor = anchor_from_prompt(text);
  instance.k = k;
  instance.rendered_text = text;
  instance.instance_id = audit::to_hex(audit::fnv1a64(text));
  // Substring scan is enough to light up the bias path over HTTP.
  for (const auto& value : mock.biased_values) {
    if (text.find(value) != std::string::npos) {
      instance.condition.kind = audit::ConditionKind::kSensitive;
      instance.condition.attribute_values = {{"probe", value}};
      break;
    }
  }
  return instance;
}

int mock_serve_command(int port, const audit::MockModelConfig& mock, int k,
                       const std::string& anchor, const std::string& value,
                       int samples) {
  if (!anchor.empty()) {
    audit::PromptInstance instance;
    instance.anchor = anchor;
    instance.k = k;
    instance.rendered_text = anchor;
    instance.instance_id = audit::to_hex(audit::fnv1a64(anchor));
    if (!value.empty()) {
      instance.condition.kind = audit::ConditionKind::kSensitive;
      instance.condition.attribute_values = {{"probe", value}};
    }
    for (int sample = 0; sample < samples; ++sample) {
      if (samples > 1) std::cout << "--- sample " << sample << "\n";
      std::cout << audit::mock_recommend(instance, mock, sample);
    }
    return 0;
  }

  httplib::Server server;
  server.Post(".*", [&](const httplib::Request& request,
                        httplib::Response& response) {
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(request.body);
    } catch (const nlohmann::json::exception&) {
      response.status = 400;
      response.set_content("{\"error\":\"bad json\"}", "application/json");
      return;
    }
    std::string text;
    if (body.contains("contents")) {
      for (const auto& content : body["contents"]) {
        for (const auto& part : content.value("parts", nlohmann::json::array())) {
          text += part.value("text", "");
        }
      }
    }
    if (text.empty()) {
      response.status = 400;
      response.set_content("{\"error\":\"no prompt text\"}", "application/json");
      return;
    }
    audit::PromptInstance instance = instance_for_prompt(text, mock, k);
    std::string completion = audit::mock_recommend(instance, mock, 0);
    nlohmann::json reply = {
        {"candidates",
         {{{"content", {{"parts", {{{"text", completion}}}}}},
           {"finishReason", "STOP"}}}}};
    response.set_content(reply.dump(), "application/json");
  });
  std::cout << "mock model listening on http://127.0.0.1:" << port
            << " (POST Gemini-style generateContent bodies)\n";
  if (!server.listen("127.0.0.1", port)) {
    throw audit::IoError("cannot bind port " + std::to_string(port));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"batch fairness and uncertainty audit for LLM recommenders"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "execute an audit from a config file");
  std::string config_path;
  run->add_option("--config", config_path, "run config (JSON)")->required();
  std::string provider_override, domain_override, out_override;
  int k_override = 0, samples_override = 0;
  std::uint64_t seed_override = 0;
  auto* provider_opt = run->add_option("--provider", provider_override,
                                       "override provider kind (mock|live)");
  auto* k_opt = run->add_option("--k", k_override, "override list length K");
  auto* seed_opt = run->add_option("--seed", seed_override, "override run seed");
  auto* samples_opt =
      run->add_option("--samples", samples_override, "override samples per prompt");
  auto* out_opt = run->add_option("--out", out_override, "override output directory");
  auto* domain_opt =
      run->add_option("--domain", domain_override, "override domain (music|movie)");

  // metrics
  auto* metrics = app.add_subcommand(
      "metrics", "score one candidate list against one reference list");
  std::string ref_path, cand_path;
  int metrics_k = 25;
  metrics->add_option("--ref", ref_path, "reference list file")->required();
  metrics->add_option("--cand", cand_path, "candidate list file")->required();
  metrics->add_option("--k", metrics_k, "truncation depth");

  // mock-serve
  auto* mock_serve = app.add_subcommand(
      "mock-serve", "dump or serve mock model completions for inspection");
  int port = 8089, mock_k = 25, mock_samples = 1;
  audit::MockModelConfig mock;
  std::string mock_anchor, mock_value;
  std::vector<std::string> biased;
  mock_serve->add_option("--port", port, "listen port (server mode)");
  mock_serve->add_option("--seed", mock.seed, "mock seed");
  mock_serve->add_option("--catalog-size", mock.catalog_size, "catalog size");
  mock_serve->add_option("--bias", mock.bias_strength, "bias strength in [0,1]");
  mock_serve->add_option("--biased-value", biased,
                         "value whose prompts get the biased sub-catalog");
  mock_serve->add_option("--noise", mock.noise_temperature, "noise temperature");
  mock_serve->add_option("--k", mock_k, "list length");
  mock_serve->add_option(
      "--anchor", mock_anchor,
      "print completions for this anchor to stdout instead of serving");
  mock_serve->add_option("--value", mock_value,
                         "sensitive value for --anchor mode");
  mock_serve->add_option("--samples", mock_samples, "samples in --anchor mode");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      audit::RunOverrides overrides;
      if (provider_opt->count() > 0) overrides.provider_kind = provider_override;
      if (k_opt->count() > 0) overrides.k = k_override;
      if (seed_opt->count() > 0) overrides.seed = seed_override;
      if (samples_opt->count() > 0) overrides.samples = samples_override;
      if (out_opt->count() > 0) overrides.output_dir = out_override;
      if (domain_opt->count() > 0) overrides.domain = domain_override;
      return run_command(config_path, overrides);
    }
    if (metrics->parsed()) {
      return metrics_command(ref_path, cand_path, metrics_k);
    }
    mock.biased_values.insert(biased.begin(), biased.end());
    return mock_serve_command(port, mock, mock_k, mock_anchor, mock_value,
                              mock_samples);
  } catch (const audit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const audit::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const audit::AuthError& e) {
    std::cerr << "auth error: " << e.what() << "\n";
    return 4;
  } catch (const audit::TransientProviderError& e) {
    std::cerr << "provider error: " << e.what() << "\n";
    return 5;
  } catch (const audit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
