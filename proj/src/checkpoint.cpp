/* Copyright 2026 The pushpull Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "pushpull/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "pushpull/config_io.hpp"

namespace pushpull {
namespace {

constexpr char kMagic[8] = {'P', 'P', 'C', 'K', 'P', 'T', '\0', '\0'};
constexpr std::uint8_t kDtypeF32 = 1;

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  template <typename U>
  void le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
  }
  void str(const std::string& s) {
    le(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  const std::vector<char>& data() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  Reader(std::vector<char> buf, std::string path)
      : buf_(std::move(buf)), path_(std::move(path)) {}

  void need(std::size_t n) {
    if (pos_ + n > buf_.size()) {
      fail(ErrorCode::kFormat, path_ + ": truncated at offset " +
                                   std::to_string(pos_) + " (need " +
                                   std::to_string(n) + " more bytes)");
    }
  }
  template <typename U>
  U le() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return v;
  }
  std::string str() {
    const auto n = le<std::uint32_t>();
    need(n);
    std::string s(buf_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  void expect(const char* magic, std::size_t n) {
    need(n);
    if (std::memcmp(buf_.data() + pos_, magic, n) != 0) {
      fail(ErrorCode::kFormat, path_ + ": not a checkpoint (bad magic)");
    }
    pos_ += n;
  }
  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == buf_.size(); }
  const std::string& path() const { return path_; }

 private:
  std::vector<char> buf_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

Checkpoint make_checkpoint(const Model& model, std::uint64_t seed,
                           const std::string& dataset,
                           const Normalization& normalization,
                           int epochs_completed) {
  Checkpoint c;
  c.spec = model.spec();
  c.seed = seed;
  c.dataset = dataset;
  c.normalization = normalization;
  c.epochs_completed = epochs_completed;
  for (const auto& p : model.parameters()) {
    c.tensors.push_back({p.name, false, p.param->value});
  }
  for (const auto& b : model.buffers()) {
    c.tensors.push_back({b.name, true, *b.tensor});
  }
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  Writer w;
  w.bytes(kMagic, sizeof(kMagic));
  w.le(Checkpoint::kFormatVersion);
  const Json meta{{"spec", ckpt.spec},
                  {"seed", ckpt.seed},
                  {"dataset", ckpt.dataset},
                  {"normalization", ckpt.normalization},
                  {"epochs_completed", ckpt.epochs_completed}};
  w.str(meta.dump());
  w.le(static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& e : ckpt.tensors) {
    w.str(e.name);
    w.le(kDtypeF32);
    w.le(static_cast<std::uint8_t>(e.is_buffer ? 1 : 0));
    w.le(static_cast<std::uint32_t>(e.value.rank()));
    for (auto d : e.value.shape()) w.le(static_cast<std::uint64_t>(d));
    for (float v : e.value.data()) w.le(std::bit_cast<std::uint32_t>(v));
  }
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write checkpoint " + path.string());
  out.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open checkpoint " + path.string());
  Reader r({std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()},
           path.string());
  r.expect(kMagic, sizeof(kMagic));
  const auto version = r.le<std::uint32_t>();
  if (version != Checkpoint::kFormatVersion) {
    fail(ErrorCode::kFormat, path.string() + ": unsupported format version " +
                                 std::to_string(version));
  }
  Checkpoint c;
  try {
    const Json meta = Json::parse(r.str());
    c.spec = meta.at("spec").get<ModelSpec>();
    c.seed = meta.at("seed").get<std::uint64_t>();
    c.dataset = meta.at("dataset").get<std::string>();
    c.normalization = meta.at("normalization").get<Normalization>();
    c.epochs_completed = meta.at("epochs_completed").get<int>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, path.string() + ": bad metadata: " + e.what());
  }
  const auto count = r.le<std::uint32_t>();
  for (std::uint32_t t = 0; t < count; ++t) {
    Checkpoint::Entry e;
    e.name = r.str();
    const auto dtype = r.le<std::uint8_t>();
    if (dtype != kDtypeF32) {
      fail(ErrorCode::kFormat, path.string() + ": tensor " + e.name +
                                   " has unknown dtype " + std::to_string(dtype));
    }
    e.is_buffer = r.le<std::uint8_t>() != 0;
    const auto rank = r.le<std::uint32_t>();
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(r.le<std::uint64_t>());
    std::vector<float> values(shape_numel(shape));
    for (auto& v : values) v = std::bit_cast<float>(r.le<std::uint32_t>());
    e.value = Tensor(std::move(shape), std::move(values));
    c.tensors.push_back(std::move(e));
  }
  if (!r.done()) {
    fail(ErrorCode::kFormat, path.string() + ": trailing bytes at offset " +
                                 std::to_string(r.pos()));
  }
  return c;
}

Model restore_model(const Checkpoint& ckpt) {
  Model model = build_model(ckpt.spec, ckpt.seed, Init::kZero);
  std::map<std::string, const Tensor*> stored;
  for (const auto& e : ckpt.tensors) stored[e.name] = &e.value;
  auto assign = [&](const std::string& name, Tensor& dst) {
    const auto it = stored.find(name);
    if (it == stored.end()) {
      fail(ErrorCode::kFormat, "checkpoint is missing tensor " + name);
    }
    if (it->second->shape() != dst.shape()) {
      fail(ErrorCode::kShapeMismatch,
           "checkpoint tensor " + name + " is " +
               shape_str(it->second->shape()) + ", model expects " +
               shape_str(dst.shape()));
    }
    dst = *it->second;
    stored.erase(it);
  };
  for (const auto& p : model.parameters()) assign(p.name, p.param->value);
  for (const auto& b : model.buffers()) assign(b.name, *b.tensor);
  if (!stored.empty()) {
    fail(ErrorCode::kFormat,
         "checkpoint holds unknown tensor " + stored.begin()->first);
  }
  model.zero_grad();
  return model;
}

}  // namespace pushpull
