// Copyright 2026 The nerpipe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Binary model container. Integers and doubles are stored in host byte order
// (little-endian on every supported platform). Emitter weights are stored
// sparsely: only rows with a non-zero raw weight are written.

#include <cstring>

#include "crf.h"
#include "json.hpp"
#include "status.h"
#include "util.h"

namespace nerpipe {

namespace {

constexpr char kMagic[8] = {'N', 'E', 'R', 'C', 'R', 'F', '\0', '\0'};

template <typename T>
void Put(std::string* out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out->append(buf, sizeof(T));
}

void PutDoubles(std::string* out, const double* data, std::size_t n) {
  out->append(reinterpret_cast<const char*>(data), n * sizeof(double));
}

class Reader {
 public:
  Reader(std::string_view bytes, std::size_t pos) : bytes_(bytes), pos_(pos) {}

  template <typename T>
  T Get() {
    Need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  void GetDoubles(double* out, std::size_t n) {
    Need(n * sizeof(double));
    std::memcpy(out, bytes_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
  }
  std::string_view GetBytes(std::size_t n) {
    Need(n);
    std::string_view s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  void Need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) {
      throw Error(ErrorCode::kCorruption, "model file truncated");
    }
  }
  std::string_view bytes_;
  std::size_t pos_;
};

}  // namespace

std::string SerializeModel(const CrfModel& model) {
  const FeatureEmitter& emitter = model.emitter();
  const EmitterConfig& ec = emitter.config();
  nlohmann::ordered_json header;
  header["format_version"] = kModelFormatVersion;
  header["labels"] = model.scheme().labels();
  header["constrained"] = model.constrained();
  header["emitter"] = {
      {"kind", model.emitter_kind() == EmitterKind::kHashed ? "hashed" : "external"},
      {"window", ec.window},
      {"hash_bits", ec.hash_bits},
      {"hash_seed", ec.hash_seed}};
  header["seeds"] = {{"train", model.train_seed()}, {"hash", ec.hash_seed}};
  const std::string header_text = header.dump();

  std::string out(kMagic, sizeof(kMagic));
  Put<uint32_t>(&out, kModelFormatVersion);
  Put<uint32_t>(&out, static_cast<uint32_t>(header_text.size()));
  out += header_text;

  const CrfParams& p = model.params();
  const int T = p.num_tags;
  PutDoubles(&out, p.transitions.data().data(), static_cast<std::size_t>(T) * T);
  PutDoubles(&out, p.start.data(), T);
  PutDoubles(&out, p.end.data(), T);
  Put<double>(&out, emitter.scale());

  const auto& raw = emitter.raw_weights();
  std::vector<uint32_t> rows;
  for (std::size_t f = 0; f < emitter.dim(); ++f) {
    const double* w = raw.data() + f * T;
    for (int y = 0; y < T; ++y) {
      // Bitwise test so that -0.0 survives the round trip.
      uint64_t bits;
      std::memcpy(&bits, &w[y], sizeof(bits));
      if (bits != 0) {
        rows.push_back(static_cast<uint32_t>(f));
        break;
      }
    }
  }
  Put<uint64_t>(&out, rows.size());
  for (uint32_t f : rows) {
    Put<uint32_t>(&out, f);
    PutDoubles(&out, raw.data() + std::size_t{f} * T, T);
  }
  Put<uint32_t>(&out, Crc32(out));
  return out;
}

CrfModel DeserializeModel(std::string_view bytes) {
  if (bytes.size() < sizeof(kMagic) + 4 ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCode::kCorruption, "not a model file");
  }
  Reader reader(bytes, sizeof(kMagic));
  const uint32_t version = reader.Get<uint32_t>();
  if (version != kModelFormatVersion) {
    throw Error(ErrorCode::kVersion,
                "unsupported model format version " + std::to_string(version) +
                    " (expected " + std::to_string(kModelFormatVersion) + ")");
  }
  if (bytes.size() < sizeof(kMagic) + 12) {
    throw Error(ErrorCode::kCorruption, "model file truncated");
  }
  uint32_t stored_crc;
  std::memcpy(&stored_crc, bytes.data() + bytes.size() - 4, 4);
  std::string_view body = bytes.substr(0, bytes.size() - 4);
  if (Crc32(body) != stored_crc) {
    throw Error(ErrorCode::kCorruption, "model checksum mismatch");
  }

  Reader r(body, reader.pos());
  const uint32_t header_len = r.Get<uint32_t>();
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(r.GetBytes(header_len));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruption, std::string("bad model header: ") + e.what());
  }
  CrfModel model;
  try {
    LabelScheme scheme(header.at("labels").get<std::vector<std::string>>());
    EmitterConfig ec;
    const auto& em = header.at("emitter");
    ec.window = em.at("window").get<int>();
    ec.hash_bits = em.at("hash_bits").get<int>();
    ec.hash_seed = em.at("hash_seed").get<uint64_t>();
    const std::string kind = em.at("kind").get<std::string>();
    if (kind != "hashed" && kind != "external") {
      throw Error(ErrorCode::kCorruption, "unknown emitter kind " + kind);
    }
    model = CrfModel::Create(
        scheme, ec, header.at("constrained").get<bool>(),
        kind == "hashed" ? EmitterKind::kHashed : EmitterKind::kExternal);
    model.set_train_seed(header.at("seeds").at("train").get<uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruption, std::string("bad model header: ") + e.what());
  }

  CrfParams& p = model.mutable_params();
  const int T = p.num_tags;
  r.GetDoubles(p.transitions.data().data(), static_cast<std::size_t>(T) * T);
  r.GetDoubles(p.start.data(), T);
  r.GetDoubles(p.end.data(), T);
  FeatureEmitter& emitter = model.mutable_emitter();
  emitter.set_scale(r.Get<double>());
  const uint64_t rows = r.Get<uint64_t>();
  auto& raw = emitter.mutable_raw_weights();
  for (uint64_t k = 0; k < rows; ++k) {
    uint32_t f = r.Get<uint32_t>();
    if (f >= emitter.dim()) {
      throw Error(ErrorCode::kCorruption, "feature row out of range");
    }
    r.GetDoubles(raw.data() + std::size_t{f} * T, T);
  }
  if (r.pos() != body.size()) {
    throw Error(ErrorCode::kCorruption, "trailing bytes in model file");
  }
  return model;
}

void SaveModel(const CrfModel& model, const std::string& path) {
  AtomicWriteFile(path, SerializeModel(model));
}

CrfModel LoadModel(const std::string& path) {
  return DeserializeModel(ReadFile(path));
}

}  // namespace nerpipe
