/*
 * Copyright 2026 The cmerc Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "cmerc/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "cmerc/errors.hpp"

namespace cmerc {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  return "invalid value '" + std::string(value) + "' for '" + std::string(key) + "' (expected " +
         std::string(expected) + ")";
}

std::uint64_t to_u64(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw UsageError(bad_value(key, value, "a non-negative integer"));
  }
  return out;
}

std::size_t to_size(std::string_view key, std::string_view value) {
  return static_cast<std::size_t>(to_u64(key, value));
}

double to_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) {
    throw UsageError(bad_value(key, value, "a finite number"));
  }
  return out;
}

std::vector<std::string> to_list(std::string_view value) {
  std::vector<std::string> out;
  if (trim(value).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = value.find(',', start);
    out.emplace_back(trim(value.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string num(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_same_v<T, std::string>) {
      out += items[i];
    } else {
      out += std::to_string(items[i]);
    }
  }
  return out;
}

constexpr std::array<const char*, kNumStreams> kDimKeys{"text_dim", "video_face_dim",
                                                        "video_back_dim", "audio_dim"};

const std::set<std::string>& arch_keys() {
  static const std::set<std::string> keys{
      "num_classes",     "text_dim",      "video_face_dim", "video_back_dim",
      "audio_dim",       "lstm_hidden",   "encoder_dim",    "attention_layers",
      "man_layers",      "man_width",     "heads",          "context_hidden",
      "context_dim"};
  return keys;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError("config: " + message);
}

}  // namespace

AlphaMode parse_alpha_mode(std::string_view text) {
  if (text == "learned") return AlphaMode::learned;
  if (text == "fixed") return AlphaMode::fixed;
  if (text == "random") return AlphaMode::random;
  throw UsageError("unknown alpha_mode '" + std::string(text) + "' (learned|fixed|random)");
}

std::string_view to_string(AlphaMode mode) {
  switch (mode) {
    case AlphaMode::learned: return "learned";
    case AlphaMode::fixed: return "fixed";
    case AlphaMode::random: return "random";
  }
  return "?";
}

void RunConfig::resolve_dims(const data::StreamDims& dims) {
  for (std::size_t s = 0; s < kNumStreams; ++s) {
    if (stream_dims[s] == 0) {
      stream_dims[s] = dims[s];
    } else if (dims[s] != 0 && dims[s] != stream_dims[s]) {
      throw DataError(std::string("config ") + kDimKeys[s] + " = " + std::to_string(stream_dims[s]) +
                      " but the data has width " + std::to_string(dims[s]));
    }
  }
}

void RunConfig::validate() const {
  require(num_classes >= 2, "num_classes must be >= 2");
  require(lstm_hidden > 0 && encoder_dim > 0 && man_width > 0, "dimensions must be positive");
  require(attention_layers >= 1, "attention_layers must be >= 1");
  require(man_layers >= 1, "man_layers must be >= 1");
  require(heads >= 1, "heads must be >= 1");
  require(context_hidden > 0 && context_dim > 0, "context dimensions must be positive");
  require(gamma >= 0.0, "gamma must be >= 0");
  require(tau > 0.0, "tau must be positive");
  require(negatives >= 1, "negatives must be >= 1");
  require(epsilon > 0.0, "epsilon must be positive");
  require(momentum >= 0.0 && momentum <= 1.0, "momentum must lie in [0, 1]");
  require(informative_budget >= 1, "informative_budget must be >= 1");
  require(learning_rate > 0.0, "learning_rate must be positive");
  require(finetune_scale >= 0.0, "finetune_scale must be >= 0");
  require(max_grad_norm >= 0.0, "max_grad_norm must be >= 0");
  require(batch_size >= 1, "batch_size must be >= 1");
  for (double f : split) require(f >= 0.0, "split fractions must be >= 0");
  require(std::abs(split[0] + split[1] + split[2] - 1.0) <= 1e-9, "split fractions must sum to 1");
  for (std::size_t c : subset_classes) require(c < num_classes, "subset_classes entry out of range");
  require(class_names.empty() || class_names.size() == num_classes,
          "class_names needs one name per class");
  require(explain_mask_prob > 0.0 && explain_mask_prob < 1.0, "explain_mask_prob must lie in (0, 1)");
  require(explain_kernel >= 0.0 && explain_lambda >= 0.0, "explain kernel and lambda must be >= 0");
}

void RunConfig::set(std::string_view key, std::string_view value) {
  for (std::size_t s = 0; s < kNumStreams; ++s) {
    if (key == kDimKeys[s]) {
      stream_dims[s] = to_size(key, value);
      return;
    }
  }
  if (key == "num_classes") num_classes = to_size(key, value);
  else if (key == "lstm_hidden") lstm_hidden = to_size(key, value);
  else if (key == "encoder_dim") encoder_dim = to_size(key, value);
  else if (key == "attention_layers") attention_layers = to_size(key, value);
  else if (key == "man_layers") man_layers = to_size(key, value);
  else if (key == "man_width") man_width = to_size(key, value);
  else if (key == "heads") heads = to_size(key, value);
  else if (key == "context_hidden") context_hidden = to_size(key, value);
  else if (key == "context_dim") context_dim = to_size(key, value);
  else if (key == "gamma") gamma = to_double(key, value);
  else if (key == "tau") tau = to_double(key, value);
  else if (key == "focal_form") focal_form = losses::parse_focal_form(value);
  else if (key == "nce_form") nce_form = losses::parse_nce_form(value);
  else if (key == "negatives_per_anchor") negatives = to_size(key, value);
  else if (key == "alpha_mode") alpha_mode = parse_alpha_mode(value);
  else if (key == "epsilon") epsilon = to_double(key, value);
  else if (key == "momentum") momentum = to_double(key, value);
  else if (key == "informative_budget") informative_budget = to_size(key, value);
  else if (key == "learning_rate") learning_rate = to_double(key, value);
  else if (key == "finetune_scale") finetune_scale = to_double(key, value);
  else if (key == "max_grad_norm") max_grad_norm = to_double(key, value);
  else if (key == "stage1_epochs") stage1_epochs = to_size(key, value);
  else if (key == "stage2_epochs") stage2_epochs = to_size(key, value);
  else if (key == "batch_size") batch_size = to_size(key, value);
  else if (key == "seed") seed = to_u64(key, value);
  else if (key == "train_fraction") split[0] = to_double(key, value);
  else if (key == "val_fraction") split[1] = to_double(key, value);
  else if (key == "test_fraction") split[2] = to_double(key, value);
  else if (key == "subset_classes") {
    subset_classes.clear();
    for (const auto& item : to_list(value)) subset_classes.push_back(to_size(key, item));
  } else if (key == "class_names") class_names = to_list(value);
  else if (key == "explain_samples") explain_samples = to_size(key, value);
  else if (key == "explain_mask_prob") explain_mask_prob = to_double(key, value);
  else if (key == "explain_kernel") explain_kernel = to_double(key, value);
  else if (key == "explain_lambda") explain_lambda = to_double(key, value);
  else if (key == "explain_group_width") explain_group_width = to_size(key, value);
  else throw UsageError("unknown config key '" + std::string(key) + "'");
}

std::vector<std::pair<std::string, std::string>> RunConfig::to_pairs() const {
  std::vector<std::pair<std::string, std::string>> out{
      {"num_classes", std::to_string(num_classes)}};
  for (std::size_t s = 0; s < kNumStreams; ++s) out.emplace_back(kDimKeys[s], std::to_string(stream_dims[s]));
  out.insert(out.end(), {
      {"lstm_hidden", std::to_string(lstm_hidden)},
      {"encoder_dim", std::to_string(encoder_dim)},
      {"attention_layers", std::to_string(attention_layers)},
      {"man_layers", std::to_string(man_layers)},
      {"man_width", std::to_string(man_width)},
      {"heads", std::to_string(heads)},
      {"context_hidden", std::to_string(context_hidden)},
      {"context_dim", std::to_string(context_dim)},
      {"gamma", num(gamma)},
      {"tau", num(tau)},
      {"focal_form", std::string(losses::to_string(focal_form))},
      {"nce_form", std::string(losses::to_string(nce_form))},
      {"negatives_per_anchor", std::to_string(negatives)},
      {"alpha_mode", std::string(to_string(alpha_mode))},
      {"epsilon", num(epsilon)},
      {"momentum", num(momentum)},
      {"informative_budget", std::to_string(informative_budget)},
      {"learning_rate", num(learning_rate)},
      {"finetune_scale", num(finetune_scale)},
      {"max_grad_norm", num(max_grad_norm)},
      {"stage1_epochs", std::to_string(stage1_epochs)},
      {"stage2_epochs", std::to_string(stage2_epochs)},
      {"batch_size", std::to_string(batch_size)},
      {"seed", std::to_string(seed)},
      {"train_fraction", num(split[0])},
      {"val_fraction", num(split[1])},
      {"test_fraction", num(split[2])},
      {"subset_classes", join(subset_classes)},
      {"class_names", join(class_names)},
      {"explain_samples", std::to_string(explain_samples)},
      {"explain_mask_prob", num(explain_mask_prob)},
      {"explain_kernel", num(explain_kernel)},
      {"explain_lambda", num(explain_lambda)},
      {"explain_group_width", std::to_string(explain_group_width)},
  });
  return out;
}

std::string RunConfig::arch_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [key, value] : to_pairs()) {
    if (!arch_keys().count(key)) continue;
    for (char c : key + "=" + value + "\n") {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<KeyValue> parse_key_values(const std::string& text) {
  std::vector<KeyValue> out;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view view = raw;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError("config line " + std::to_string(line) + ": expected 'key = value'");
    }
    KeyValue kv{std::string(trim(view.substr(0, eq))), std::string(trim(view.substr(eq + 1))), line};
    if (kv.key.empty()) throw UsageError("config line " + std::to_string(line) + ": empty key");
    if (!seen.insert(kv.key).second) {
      throw UsageError("config line " + std::to_string(line) + ": duplicate key '" + kv.key + "'");
    }
    out.push_back(std::move(kv));
  }
  return out;
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig config;
  for (const auto& kv : parse_key_values(text)) {
    try {
      config.set(kv.key, kv.value);
    } catch (const UsageError& e) {
      throw UsageError("config line " + std::to_string(kv.line) + ": " + e.what());
    }
  }
  config.validate();
  return config;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_text_file(path));
}

data::SynthSpec parse_synth_spec(const std::string& text) {
  data::SynthSpec spec;
  for (const auto& kv : parse_key_values(text)) {
    const std::string_view key = kv.key, value = kv.value;
    try {
      bool matched = false;
      for (std::size_t s = 0; s < kNumStreams; ++s) {
        if (key == kDimKeys[s]) {
          spec.dims[s] = to_size(key, value);
          matched = true;
        }
      }
      for (Mode m : kModes) {
        if (key == std::string(mode_name(m)) + "_separation") {
          spec.mode_separation[index_of(m)] = to_double(key, value);
          matched = true;
        }
      }
      if (matched) continue;
      if (key == "num_classes") spec.num_classes = to_size(key, value);
      else if (key == "separation") spec.separation = to_double(key, value);
      else if (key == "rho") spec.rho = to_double(key, value);
      else if (key == "noise") spec.noise = to_double(key, value);
      else if (key == "frame_noise") spec.frame_noise = to_double(key, value);
      else if (key == "min_frames") spec.min_frames = to_size(key, value);
      else if (key == "max_frames") spec.max_frames = to_size(key, value);
      else if (key == "dialogues") spec.num_dialogues = to_size(key, value);
      else if (key == "min_utterances") spec.min_utterances = to_size(key, value);
      else if (key == "max_utterances") spec.max_utterances = to_size(key, value);
      else if (key == "speakers") spec.num_speakers = to_size(key, value);
      else if (key == "seed") spec.seed = to_u64(key, value);
      else if (key == "class_weights") {
        spec.class_weights.clear();
        for (const auto& item : to_list(value)) spec.class_weights.push_back(to_double(key, item));
      } else {
        throw UsageError("unknown synth key '" + kv.key + "'");
      }
    } catch (const UsageError& e) {
      throw UsageError("spec line " + std::to_string(kv.line) + ": " + e.what());
    }
  }
  try {
    spec.validate();
  } catch (const ContractError& e) {
    throw UsageError(e.what());
  }
  return spec;
}

data::SynthSpec load_synth_spec(const std::filesystem::path& path) {
  return parse_synth_spec(read_text_file(path));
}

}  // namespace cmerc
