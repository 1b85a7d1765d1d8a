#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_map>

#include "audit/errors.hpp"
#include "audit/model_gateway.hpp"
#include "audit/util.hpp"

namespace audit {
namespace {

std::string pad_number(const char* prefix, int width, std::uint64_t n) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%0*llu", prefix, width,
                static_cast<unsigned long long>(n));
  return buf;
}

// How many of the first `prefix` positions a bias of strength beta replaces.
// The epsilon keeps ceil() off the wrong side of representation error for
// non-dyadic betas (0.1 * 10 and friends).
int replaced_in_prefix(double beta, int prefix) {
  double raw = std::ceil(beta * prefix - 1e-9);
  return raw < 0.0 ? 0 : static_cast<int>(raw);
}

// First condition value that the config biases, if any.
const std::string* biased_value(const PromptInstance& instance,
                                const MockModelConfig& config) {
  for (const auto& [attribute, value] : instance.condition.attribute_values) {
    if (config.biased_values.count(value)) return &value;
  }
  return nullptr;
}

}  // namespace

std::string mock_recommend(const PromptInstance& instance,
                           const MockModelConfig& config, int sample_index) {
  int k = instance.k;
  if (config.catalog_size < k) {
    throw ConfigError("mock catalog_size " +
                      std::to_string(config.catalog_size) +
                      " smaller than k " + std::to_string(k));
  }

  // Partial Fisher–Yates over the catalog indices, keyed by (seed, anchor)
  // only, so every condition shares the anchor's base list.
  SplitMix64 base_rng(
      fnv1a64(instance.anchor, fnv1a64("mock-base") ^ config.seed));
  std::unordered_map<std::uint64_t, std::uint64_t> swaps;
  std::vector<std::string> titles;
  titles.reserve(k);
  auto slot = [&](std::uint64_t i) {
    auto it = swaps.find(i);
    return it == swaps.end() ? i : it->second;
  };
  for (int i = 0; i < k; ++i) {
    std::uint64_t j =
        i + base_rng.next_below(static_cast<std::uint64_t>(config.catalog_size) - i);
    std::uint64_t picked = slot(j);
    swaps[j] = slot(i);
    titles.push_back(pad_number("Item ", 5, picked));
  }

  if (const std::string* value = biased_value(instance, config)) {
    for (int i = 0; i < k; ++i) {
      if (replaced_in_prefix(config.bias_strength, i + 1) >
          replaced_in_prefix(config.bias_strength, i)) {
        titles[i] = "Alt " + *value + " " + pad_number("", 3, i);
      }
    }
  }

  int noisy = static_cast<int>(config.noise_temperature * k / 2.0);
  if (noisy > 0) {
    SplitMix64 noise_rng(fnv1a64(
        instance.instance_id,
        fnv1a64("mock-noise") ^ config.seed ^
            (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(sample_index + 1))));
    std::set<std::string> in_list(titles.begin(), titles.end());
    std::set<int> positions;
    while (static_cast<int>(positions.size()) < noisy) {
      positions.insert(static_cast<int>(noise_rng.next_below(k)));
    }
    for (int position : positions) {
      std::string title;
      do {
        title = pad_number("Noise ", 6, noise_rng.next_below(1000000));
      } while (in_list.count(title));
      in_list.erase(titles[position]);
      in_list.insert(title);
      titles[position] = std::move(title);
    }
  }

  std::string out;
  for (int i = 0; i < k; ++i) {
    out += std::to_string(i + 1);
    out += ". ";
    out += titles[i];
    out += '\n';
  }
  return out;
}

}  // namespace audit
