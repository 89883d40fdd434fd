#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "informed/io.hpp"

namespace informed {

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path);
  return bytes;
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

void write_text_file(const std::string& path, const std::string& text) {
  write_file_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec || !std::filesystem::is_directory(path)) throw IoError("cannot create directory " + path);
}

std::string git_blob_hash(std::span<const std::uint8_t> bytes) {
  const std::string header = "blob " + std::to_string(bytes.size()) + '\0';
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  const bool ok = ctx != nullptr && EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 && EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw IoError("SHA-1 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    const unsigned char b = digest[i];
    out += kHex[b >> 4];
    out += kHex[b & 15];
  }
  return out;
}

namespace {

constexpr char kObsMagic[8] = {'I', 'N', 'F', 'O', 'B', 'S', '0', '1'};

}  // namespace

void write_observation(const std::string& path, const ImageGrid& image) {
  std::vector<std::uint8_t> bytes(sizeof kObsMagic + 24 + image.size() * 8);
  std::memcpy(bytes.data(), kObsMagic, sizeof kObsMagic);
  const std::uint64_t dims[3] = {image.width(), image.height(), image.channels()};
  std::memcpy(bytes.data() + 8, dims, 24);
  std::memcpy(bytes.data() + 32, image.data().data(), image.size() * 8);
  write_file_bytes(path, bytes);
}

ImageGrid read_observation(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() < 32 || std::memcmp(bytes.data(), kObsMagic, 8) != 0)
    throw IoError(path + ": not an observation file");
  std::uint64_t dims[3];
  std::memcpy(dims, bytes.data() + 8, 24);
  if ((dims[2] != 1 && dims[2] != 3) || dims[0] == 0 || dims[1] == 0 || dims[0] > (1u << 16) || dims[1] > (1u << 16))
    throw IoError(path + ": bad observation header");
  ImageGrid img(dims[0], dims[1], dims[2]);
  if (bytes.size() != 32 + img.size() * 8) throw IoError(path + ": observation size does not match header");
  std::memcpy(img.data().data(), bytes.data() + 32, img.size() * 8);
  return img;
}

void write_preview(const std::string& path, const ImageGrid& image) {
  std::ostringstream out;
  out << (image.channels() == 1 ? "P5" : "P6") << '\n' << image.width() << ' ' << image.height() << "\n255\n";
  std::string body(image.size(), '\0');
  const auto px = image.data();
  for (std::size_t i = 0; i < px.size(); ++i)
    body[i] = static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(px[i], 0.0, 1.0) * 255.0)));
  write_text_file(path, out.str() + body);
}

std::string format_real(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string format_trace_csv(const ChainSet& chains) {
  std::string out = "iter,chain,accepted,logp";
  const std::size_t dim = chains.dim();
  for (std::size_t d = 0; d < dim; ++d) out += ",theta_" + std::to_string(d);
  out += '\n';
  for (std::size_t c = 0; c < chains.chains.size(); ++c) {
    const Trace& t = chains.chains[c];
    for (std::size_t i = 0; i < t.size(); ++i) {
      out += std::to_string(i);
      out += ',';
      out += std::to_string(c);
      out += ',';
      out += t.accepted[i] ? '1' : '0';
      out += ',';
      out += format_real(t.logp[i]);
      for (double v : t.sample(i)) {
        out += ',';
        out += format_real(v);
      }
      out += '\n';
    }
  }
  return out;
}

void write_trace_csv(const std::string& path, const ChainSet& chains) { write_text_file(path, format_trace_csv(chains)); }

namespace {

double parse_real(std::string_view s, const std::string& where) {
  if (s == "-inf") return kNegInf;
  if (s == "inf") return kInf;
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw IoError(where + ": bad number '" + std::string(s) + "'");
  return v;
}

}  // namespace

ChainSet read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("iter,chain,accepted,logp", 0) != 0)
    throw IoError(path + ": missing trace header");
  const std::size_t dim = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) - 3;
  ChainSet set;
  std::size_t lineno = 1;
  std::vector<std::string_view> fields;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    fields.clear();
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1))
      fields.push_back(rest.substr(0, pos));
    fields.push_back(rest);
    const std::string where = path + ":" + std::to_string(lineno);
    if (fields.size() != dim + 4) throw IoError(where + ": wrong number of fields");
    const auto iter = static_cast<std::size_t>(parse_real(fields[0], where));
    const auto chain = static_cast<std::size_t>(parse_real(fields[1], where));
    if (chain == set.chains.size()) {
      set.chains.emplace_back();
      set.chains.back().dim = dim;
    }
    if (chain + 1 != set.chains.size()) throw IoError(where + ": chains must appear in order");
    Trace& t = set.chains.back();
    if (iter != t.size()) throw IoError(where + ": iterations must be consecutive");
    std::vector<double> theta(dim);
    for (std::size_t d = 0; d < dim; ++d) theta[d] = parse_real(fields[4 + d], where);
    t.push(theta, parse_real(fields[3], where), fields[2] == "1");
  }
  for (const auto& t : set.chains) {
    if (t.size() != set.chains.front().size()) throw IoError(path + ": chains have different lengths");
  }
  return set;
}

}  // namespace informed
