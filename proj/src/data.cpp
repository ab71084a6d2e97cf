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


#include "cmerc/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "cmerc/errors.hpp"
#include "json.hpp"

namespace cmerc::data {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::array<const char*, kNumStreams> kFieldNames{"text_feat", "video_face_feat",
                                                           "video_back_feat", "audio_feat"};

std::string where(std::size_t record, const std::string& utterance_id) {
  std::string out = "record " + std::to_string(record);
  if (!utterance_id.empty()) out += ", utterance '" + utterance_id + "'";
  return out;
}

Tensor parse_matrix(const Json& value, std::size_t record, const std::string& utterance_id,
                    const char* field) {
  if (!value.is_array() || value.empty()) {
    throw DataError(where(record, utterance_id) + ": " + field + " must be a nonempty array of rows");
  }
  const std::size_t rows = value.size();
  std::size_t cols = 0;
  std::vector<double> flat;
  for (const auto& row : value) {
    if (!row.is_array() || row.empty()) {
      throw DataError(where(record, utterance_id) + ": " + field + " rows must be nonempty arrays");
    }
    if (cols == 0) cols = row.size();
    if (row.size() != cols) {
      throw DataError(where(record, utterance_id) + ": " + field + " rows have unequal widths");
    }
    for (const auto& v : row) {
      if (!v.is_number()) throw DataError(where(record, utterance_id) + ": " + field + " holds a non-number");
      const double d = v.get<double>();
      if (!std::isfinite(d)) throw DataError(where(record, utterance_id) + ": " + field + " holds a non-finite value");
      flat.push_back(d);
    }
  }
  return Tensor({rows, cols}, std::move(flat));
}

Json matrix_json(const Tensor& t) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < t.rows(); ++r) {
    Json row = Json::array();
    for (std::size_t c = 0; c < t.cols(); ++c) row.push_back(t.at(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

const std::string& require_string(const Json& obj, const char* key, std::size_t record,
                                  const std::string& utterance_id) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw DataError(where(record, utterance_id) + ": missing string field '" + key + "'");
  }
  return it->get_ref<const std::string&>();
}

Dialogue parse_record(const std::string& line, std::size_t record) {
  Json doc;
  try {
    doc = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw DataError(where(record, {}) + ": malformed JSON: " + e.what());
  }
  if (!doc.is_object()) throw DataError(where(record, {}) + ": expected a JSON object");
  Dialogue dialogue;
  dialogue.dialogue_id = require_string(doc, "dialogue_id", record, {});
  auto utts = doc.find("utterances");
  if (utts == doc.end() || !utts->is_array()) {
    throw DataError(where(record, {}) + ": missing array field 'utterances'");
  }
  for (const auto& u : *utts) {
    if (!u.is_object()) throw DataError(where(record, {}) + ": utterance is not an object");
    Utterance utt;
    utt.utterance_id = require_string(u, "utterance_id", record, {});
    utt.speaker_id = require_string(u, "speaker_id", record, utt.utterance_id);
    auto label = u.find("label");
    if (label == u.end() || !label->is_number_integer() || label->get<long long>() < 0) {
      throw DataError(where(record, utt.utterance_id) + ": label must be a non-negative integer");
    }
    utt.label = label->get<std::size_t>();
    for (std::size_t s = 0; s < kNumStreams; ++s) {
      auto field = u.find(kFieldNames[s]);
      if (field == u.end()) {
        throw DataError(where(record, utt.utterance_id) + ": missing field '" + kFieldNames[s] + "'");
      }
      utt.features[s] = parse_matrix(*field, record, utt.utterance_id, kFieldNames[s]);
    }
    dialogue.utterances.push_back(std::move(utt));
  }
  return dialogue;
}

void validate_dialogue(const Dialogue& d, std::size_t record, std::size_t num_classes,
                       StreamDims& dims) {
  if (d.utterances.empty()) throw DataError(where(record, {}) + ": dialogue has no utterances");
  std::set<std::string> ids;
  for (const auto& u : d.utterances) {
    if (!ids.insert(u.utterance_id).second) {
      throw DataError(where(record, u.utterance_id) + ": duplicate utterance id in dialogue '" +
                      d.dialogue_id + "'");
    }
    if (num_classes > 0 && u.label >= num_classes) {
      throw DataError(where(record, u.utterance_id) + ": label " + std::to_string(u.label) +
                      " outside [0, " + std::to_string(num_classes) + ")");
    }
    for (std::size_t s = 0; s < kNumStreams; ++s) {
      const Tensor& f = u.features[s];
      if (!f.defined()) {
        throw DataError(where(record, u.utterance_id) + ": missing " + kFieldNames[s]);
      }
      if (dims[s] == 0) dims[s] = f.cols();
      if (f.cols() != dims[s]) {
        throw DataError(where(record, u.utterance_id) + ": " + kFieldNames[s] + " width " +
                        std::to_string(f.cols()) + ", expected " + std::to_string(dims[s]));
      }
    }
    if (u.stream(Stream::video_face).rows() != u.stream(Stream::video_back).rows()) {
      throw DataError(where(record, u.utterance_id) +
                      ": video_face_feat and video_back_feat row counts differ");
    }
  }
}

}  // namespace

StreamDims stream_dims(const Dataset& dataset) {
  StreamDims dims{};
  if (dataset.empty() || dataset.front().utterances.empty()) return dims;
  const auto& u = dataset.front().utterances.front();
  for (std::size_t s = 0; s < kNumStreams; ++s) dims[s] = u.features[s].cols();
  return dims;
}

std::size_t utterance_count(const Dataset& dataset) {
  std::size_t n = 0;
  for (const auto& d : dataset) n += d.utterances.size();
  return n;
}

void validate(const Dataset& dataset, std::size_t num_classes) {
  StreamDims dims{};
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    validate_dialogue(dataset[i], i + 1, num_classes, dims);
  }
}

Dataset parse_dataset(const std::string& text, std::size_t num_classes) {
  Dataset out;
  StreamDims dims{};
  std::istringstream in(text);
  std::string line;
  std::size_t record = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++record;
    Dialogue d = parse_record(line, record);
    validate_dialogue(d, record, num_classes, dims);
    out.push_back(std::move(d));
  }
  return out;
}

Dataset load_dataset(const std::filesystem::path& path, std::size_t num_classes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_dataset(buf.str(), num_classes);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string serialize_dataset(const Dataset& dataset) {
  std::string out;
  for (const auto& d : dataset) {
    Json doc;
    doc["dialogue_id"] = d.dialogue_id;
    Json utts = Json::array();
    for (const auto& u : d.utterances) {
      Json ju;
      ju["utterance_id"] = u.utterance_id;
      ju["speaker_id"] = u.speaker_id;
      ju["label"] = u.label;
      for (std::size_t s = 0; s < kNumStreams; ++s) ju[kFieldNames[s]] = matrix_json(u.features[s]);
      utts.push_back(std::move(ju));
    }
    doc["utterances"] = std::move(utts);
    out += doc.dump();
    out += '\n';
  }
  return out;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write dataset '" + path.string() + "'");
  out << serialize_dataset(dataset);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void SynthSpec::validate() const {
  if (num_classes < 2) throw ContractError("synth: num_classes must be >= 2");
  for (std::size_t d : dims) {
    if (d == 0) throw ContractError("synth: stream dims must be positive");
  }
  if (!(separation > 0.0)) throw ContractError("synth: separation must be positive");
  for (double m : mode_separation) {
    if (!(m >= 0.0)) throw ContractError("synth: mode separation multipliers must be >= 0");
  }
  if (!(rho >= 0.0 && rho <= 1.0)) throw ContractError("synth: rho must lie in [0, 1]");
  if (!(noise >= 0.0) || !(frame_noise >= 0.0)) throw ContractError("synth: noise must be >= 0");
  if (min_frames == 0 || min_frames > max_frames) throw ContractError("synth: bad frame range");
  if (min_utterances == 0 || min_utterances > max_utterances) {
    throw ContractError("synth: bad utterance range");
  }
  if (num_speakers == 0) throw ContractError("synth: num_speakers must be positive");
  if (!class_weights.empty()) {
    if (class_weights.size() != num_classes) {
      throw ContractError("synth: one class weight per class is required");
    }
    double total = 0.0;
    for (double w : class_weights) {
      if (!(w >= 0.0)) throw ContractError("synth: class weights must be >= 0");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ContractError("synth: class weights must sum to 1");
  }
}

std::vector<std::vector<double>> synth_centroids(const SynthSpec& spec, Stream stream) {
  spec.validate();
  const std::size_t dim = spec.dims[index_of(stream)];
  // Noise-free data still needs distinct centroids, so fall back to unit scale.
  const double unit = spec.noise > 0.0 ? spec.noise : 1.0;
  const double radius = spec.separation * spec.mode_separation[index_of(mode_of(stream))] * unit;
  Rng rng = Rng(spec.seed).fork(0x100 + index_of(stream));
  std::vector<std::vector<double>> out;
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    std::vector<double> v(dim);
    // Gram-Schmidt against the earlier centroids while there is room; retry
    // on an unlucky near-dependent draw.
    for (int attempt = 0;; ++attempt) {
      for (double& x : v) x = rng.normal();
      if (c < dim) {
        for (const auto& prev : out) {
          double proj = 0.0, norm = 0.0;
          for (std::size_t k = 0; k < dim; ++k) {
            proj += v[k] * prev[k];
            norm += prev[k] * prev[k];
          }
          for (std::size_t k = 0; k < dim; ++k) v[k] -= proj / norm * prev[k];
        }
      }
      double norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
      if (norm > 1e-6 || attempt > 16) {
        for (double& x : v) x = radius * x / norm;
        break;
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

Dataset synth_generate(const SynthSpec& spec) {
  spec.validate();
  std::array<std::vector<std::vector<double>>, kNumStreams> centroids;
  for (Stream s : kStreams) centroids[index_of(s)] = synth_centroids(spec, s);
  std::vector<double> cumulative(spec.num_classes);
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    const double w = spec.class_weights.empty() ? 1.0 / static_cast<double>(spec.num_classes)
                                                : spec.class_weights[c];
    cumulative[c] = (c == 0 ? 0.0 : cumulative[c - 1]) + w;
  }
  const std::size_t latent = *std::max_element(spec.dims.begin(), spec.dims.end());
  const double shared = std::sqrt(spec.rho);
  const double own = std::sqrt(1.0 - spec.rho);

  Rng rng = Rng(spec.seed).fork(1);
  Dataset out;
  out.reserve(spec.num_dialogues);
  for (std::size_t i = 0; i < spec.num_dialogues; ++i) {
    Dialogue d;
    d.dialogue_id = "d" + std::to_string(i);
    const std::size_t n =
        spec.min_utterances + rng.index(spec.max_utterances - spec.min_utterances + 1);
    for (std::size_t j = 0; j < n; ++j) {
      Utterance u;
      u.utterance_id = d.dialogue_id + "_u" + std::to_string(j);
      u.speaker_id = "spk" + std::to_string(j % spec.num_speakers);
      const double draw = rng.uniform();
      u.label = spec.num_classes - 1;
      for (std::size_t c = 0; c < spec.num_classes; ++c) {
        if (draw < cumulative[c]) {
          u.label = c;
          break;
        }
      }
      std::vector<double> z(latent);
      for (double& x : z) x = rng.normal();
      const std::size_t frames = spec.min_frames + rng.index(spec.max_frames - spec.min_frames + 1);
      for (Stream s : kStreams) {
        const std::size_t si = index_of(s);
        const std::size_t dim = spec.dims[si];
        const auto& mu = centroids[si][u.label];
        std::vector<double> mean(dim);
        for (std::size_t k = 0; k < dim; ++k) {
          mean[k] = mu[k] + spec.noise * (shared * z[k] + own * rng.normal());
        }
        std::vector<double> flat;
        flat.reserve(frames * dim);
        for (std::size_t t = 0; t < frames; ++t) {
          for (std::size_t k = 0; k < dim; ++k) {
            flat.push_back(spec.frame_noise > 0.0 ? mean[k] + spec.frame_noise * rng.normal() : mean[k]);
          }
        }
        u.features[si] = Tensor({frames, dim}, std::move(flat));
      }
      d.utterances.push_back(std::move(u));
    }
    out.push_back(std::move(d));
  }
  return out;
}

Split split(const Dataset& dataset, std::array<double, 3> fractions, std::uint64_t seed) {
  for (double f : fractions) {
    if (!(f >= 0.0)) throw ContractError("split fractions must be non-negative");
  }
  if (std::abs(fractions[0] + fractions[1] + fractions[2] - 1.0) > 1e-9) {
    throw ContractError("split fractions must sum to 1");
  }
  const std::size_t n = dataset.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng(seed).fork(2);
  rng.shuffle(order);
  const auto n_train = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(fractions[0] * n)));
  const auto n_val =
      std::min<std::size_t>(n - n_train, static_cast<std::size_t>(std::llround(fractions[1] * n)));
  auto take = [&](std::size_t begin, std::size_t count) {
    std::vector<std::size_t> idx(order.begin() + begin, order.begin() + begin + count);
    std::sort(idx.begin(), idx.end());
    Dataset part;
    part.reserve(count);
    for (std::size_t i : idx) part.push_back(dataset[i]);
    return part;
  };
  Split out;
  out.train = take(0, n_train);
  out.val = take(n_train, n_val);
  out.test = take(n_train + n_val, n - n_train - n_val);
  return out;
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size, Rng& rng) {
  if (batch_size == 0) throw ContractError("batch size must be positive");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < n; i += batch_size) {
    out.emplace_back(order.begin() + i, order.begin() + std::min(n, i + batch_size));
  }
  return out;
}

}  // namespace cmerc::data
