#include "crowdloc/nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "crowdloc/common/error.hpp"

namespace crowdloc::nn {

namespace {

constexpr char kMagic[8] = {'C', 'R', 'W', 'D', 'P', 'A', 'R', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string bytes, std::string source) : bytes_(std::move(bytes)), source_(std::move(source)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    check(pos_ + n <= bytes_.size(), ErrorKind::load, "truncated archive " + source_);
  }
  std::string bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

std::map<std::string, const Tensor<float>*> index(const std::vector<ArchiveEntry>& entries) {
  std::map<std::string, const Tensor<float>*> out;
  for (const auto& e : entries) out[e.name] = &e.tensor;
  return out;
}

const Tensor<float>& lookup(const std::map<std::string, const Tensor<float>*>& idx, const std::string& name,
                            const Shape& shape) {
  auto it = idx.find(name);
  check(it != idx.end(), ErrorKind::load, "checkpoint is missing '" + name + "'");
  check(it->second->shape() == shape, ErrorKind::load,
        "checkpoint entry '" + name + "' has shape " + it->second->shape().str() + ", model expects " +
            shape.str());
  return *it->second;
}

}  // namespace

void write_archive(const std::filesystem::path& path, const std::vector<ArchiveEntry>& entries) {
  std::string out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    put_u32(out, static_cast<std::uint32_t>(e.name.size()));
    out += e.name;
    const Shape s = e.tensor.shape();
    for (int d : {s.n, s.c, s.h, s.w}) put_u32(out, static_cast<std::uint32_t>(d));
    for (float v : e.tensor.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  check(f.good(), ErrorKind::io, "cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  check(f.good(), ErrorKind::io, "write failed for " + path.string());
}

std::vector<ArchiveEntry> read_archive(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  check(f.good(), ErrorKind::io, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  check(bytes.size() >= 12 && std::memcmp(bytes.data(), kMagic, 8) == 0, ErrorKind::load,
        path.string() + " is not a parameter archive");
  Reader r(bytes.substr(8), path.string());
  const std::uint32_t count = r.u32();
  std::vector<ArchiveEntry> entries;
  entries.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    ArchiveEntry e;
    e.name = r.str(r.u32());
    Shape s;
    s.n = int(r.u32());
    s.c = int(r.u32());
    s.h = int(r.u32());
    s.w = int(r.u32());
    std::vector<float> data(s.numel());
    for (auto& v : data) v = std::bit_cast<float>(r.u32());
    e.tensor = Tensor<float>(s, std::move(data));
    entries.push_back(std::move(e));
  }
  check(r.done(), ErrorKind::load, "trailing bytes in " + path.string());
  return entries;
}

std::vector<ArchiveEntry> model_state(CrowdNet<float>& model) {
  std::vector<ArchiveEntry> out;
  const auto params = model.parameters();
  for (const auto& p : params.params()) out.push_back({"param:" + p.name, p.var->value()});
  for (const auto& b : params.buffers()) out.push_back({"buffer:" + b.name, *b.tensor});
  return out;
}

void load_model_state(CrowdNet<float>& model, const std::vector<ArchiveEntry>& entries) {
  const auto idx = index(entries);
  const auto params = model.parameters();
  check(entries.size() == params.params().size() + params.buffers().size(), ErrorKind::load,
        "checkpoint entry count does not match the model configuration");
  for (const auto& p : params.params()) {
    p.var->mutable_value() = lookup(idx, "param:" + p.name, p.var->shape());
  }
  for (const auto& b : params.buffers()) {
    *b.tensor = lookup(idx, "buffer:" + b.name, b.tensor->shape());
  }
}

std::vector<ArchiveEntry> optimizer_state(Adam<float>& adam, CrowdNet<float>& model) {
  std::vector<ArchiveEntry> out;
  const auto params = model.parameters();
  const auto& names = params.params();
  Tensor<float> steps(Shape{}, 0.0f);
  // step counts stay exact in float well past any realistic schedule (2^24)
  steps[0] = static_cast<float>(adam.steps());
  out.push_back({"adam:steps", steps});
  for (std::size_t k = 0; k < names.size(); ++k) {
    out.push_back({"adam.m:" + names[k].name, adam.first_moments()[k]});
    out.push_back({"adam.v:" + names[k].name, adam.second_moments()[k]});
  }
  return out;
}

void load_optimizer_state(Adam<float>& adam, CrowdNet<float>& model, const std::vector<ArchiveEntry>& entries) {
  const auto idx = index(entries);
  const auto params = model.parameters();
  const auto& names = params.params();
  adam.set_steps(static_cast<std::int64_t>(lookup(idx, "adam:steps", Shape{})[0]));
  for (std::size_t k = 0; k < names.size(); ++k) {
    adam.first_moments()[k] = lookup(idx, "adam.m:" + names[k].name, names[k].var->shape());
    adam.second_moments()[k] = lookup(idx, "adam.v:" + names[k].name, names[k].var->shape());
  }
}

}  // namespace crowdloc::nn
