#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "crowdloc/common/error.hpp"
#include "crowdloc/targets/fidt.hpp"

namespace crowdloc::targets {

namespace {

constexpr char kMagic[8] = {'F', 'I', 'D', 'T', 'M', 'A', 'P', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}

}  // namespace

std::vector<std::uint8_t> encode_fidt_file(const Grid<float>& values) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.reserve(16 + values.size() * 4);
  put_u32(out, static_cast<std::uint32_t>(values.height()));
  put_u32(out, static_cast<std::uint32_t>(values.width()));
  for (float v : values.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

Grid<float> decode_fidt_file(const std::vector<std::uint8_t>& bytes) {
  check(bytes.size() >= 16 && std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin(),
                                         [](char a, std::uint8_t b) { return std::uint8_t(a) == b; }),
        ErrorKind::load, "not a FIDT map file (bad magic)");
  const std::uint32_t h = get_u32(bytes.data() + 8);
  const std::uint32_t w = get_u32(bytes.data() + 12);
  const std::size_t expected = 16 + std::size_t(h) * w * 4;
  check(bytes.size() == expected, ErrorKind::load, "FIDT map file has wrong payload size");
  Grid<float> out(static_cast<int>(h), static_cast<int>(w));
  auto dst = out.values();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = std::bit_cast<float>(get_u32(bytes.data() + 16 + 4 * i));
  }
  return out;
}

void write_fidt_file(const std::filesystem::path& path, const Grid<float>& values) {
  const auto bytes = encode_fidt_file(values);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  check(out.good(), ErrorKind::io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Grid<float> read_fidt_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  check(in.good(), ErrorKind::io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_fidt_file(bytes);
}

}  // namespace crowdloc::targets
