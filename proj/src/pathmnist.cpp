#include "cpath/pathmnist.hpp"

#include <optional>

#include <zlib.h>

#include "cpath/binary_io.hpp"
#include "cpath/colorspace.hpp"
#include "cpath/error.hpp"
#include "cpath/evaluation.hpp"
#include "cpath/image_io.hpp"

namespace cpath {

namespace fs = std::filesystem;

namespace {

constexpr std::uint32_t kLocalHeader = 0x04034b50;
constexpr std::uint32_t kCentralHeader = 0x02014b50;
constexpr std::uint32_t kEndOfCentral = 0x06054b50;
constexpr std::uint32_t kZip64Locator = 0x07064b50;

std::string inflate_raw(std::string_view in, std::uint64_t expected) {
  std::string out(expected, '\0');
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw Error(Errc::CorruptFile, "zlib init failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  const auto produced = zs.total_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || produced != expected) throw Error(Errc::CorruptFile, "deflate stream is damaged");
  return out;
}

struct Zip64Sizes {
  std::uint64_t uncompressed, compressed, offset;
};

void apply_zip64(std::string_view extra, Zip64Sizes& s, bool need_u, bool need_c, bool need_o) {
  io::ByteReader r(extra, "zip extra field");
  while (r.remaining() >= 4) {
    const auto id = r.u16();
    const auto len = r.u16();
    auto body = r.bytes(len);
    if (id != 0x0001) continue;
    io::ByteReader z(body, "zip64 field");
    if (need_u) s.uncompressed = z.u64();
    if (need_c) s.compressed = z.u64();
    if (need_o) s.offset = z.u64();
    return;
  }
}

std::string dtype_of(std::string_view header) {
  const auto k = header.find("'descr'");
  if (k == std::string_view::npos) throw Error(Errc::CorruptFile, "npy header lacks descr");
  const auto q1 = header.find('\'', header.find(':', k) + 1);
  const auto q2 = header.find('\'', q1 + 1);
  return std::string(header.substr(q1 + 1, q2 - q1 - 1));
}

}  // namespace

std::size_t NpyArray::count() const noexcept {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

NpyArray parse_npy(std::string_view bytes) {
  io::ByteReader r(bytes, "npy array");
  if (bytes.size() < 6 || r.bytes(6) != std::string_view("\x93NUMPY", 6)) throw Error(Errc::BadMagic, "not an npy array");
  const auto major = r.u8();
  r.u8();
  const std::uint32_t header_len = major == 1 ? r.u16() : r.u32();
  const auto header = r.bytes(header_len);

  if (header.find("'fortran_order': True") != std::string_view::npos)
    throw Error(Errc::UnsupportedFormat, "Fortran-order npy arrays are not supported");
  const auto descr = dtype_of(header);
  if (descr.size() < 3) throw Error(Errc::UnsupportedFormat, "npy dtype '" + descr + "'");
  const char order = descr[0], kind = descr[1];
  const int width = std::stoi(descr.substr(2));
  if ((kind != 'u' && kind != 'i') || (width != 1 && width != 2 && width != 4 && width != 8))
    throw Error(Errc::UnsupportedFormat, "npy dtype '" + descr + "'");
  const bool big = order == '>';

  NpyArray arr;
  const auto s = header.find("'shape'");
  const auto open = header.find('(', s), close = header.find(')', open);
  if (s == std::string_view::npos || open == std::string_view::npos || close == std::string_view::npos)
    throw Error(Errc::CorruptFile, "npy header lacks shape");
  std::string dims(header.substr(open + 1, close - open - 1));
  std::size_t pos = 0;
  while (pos < dims.size()) {
    const auto comma = dims.find(',', pos);
    const auto tok = dims.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (tok.find_first_of("0123456789") != std::string::npos) arr.shape.push_back(std::stoull(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }

  const auto n = arr.count();
  r.expect_at_least(n, static_cast<std::uint64_t>(width));
  const auto raw = r.bytes(n * width);
  arr.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t v = 0;
    for (int b = 0; b < width; ++b) {
      const auto byte = static_cast<unsigned char>(raw[i * width + (big ? b : width - 1 - b)]);
      v = (v << 8) | byte;
    }
    if (kind == 'i' && width < 8 && (v >> (8 * width - 1)) & 1) v |= ~std::uint64_t{0} << (8 * width);
    arr.values[i] = static_cast<std::int64_t>(v);
  }
  return arr;
}

std::map<std::string, std::string> read_npz_members(std::string_view zip) {
  if (zip.size() < 22) throw Error(Errc::CorruptFile, "archive too small for a zip");
  std::size_t eocd = std::string_view::npos;
  for (std::size_t i = zip.size() - 22 + 1; i-- > 0 && zip.size() - i <= 22 + 65535;) {
    io::ByteReader r(zip.substr(i, 4));
    if (r.u32() == kEndOfCentral) {
      eocd = i;
      break;
    }
  }
  if (eocd == std::string_view::npos) throw Error(Errc::BadMagic, "no zip end-of-central-directory record");

  io::ByteReader e(zip.substr(eocd), "zip end record");
  e.u32();
  e.u16();
  e.u16();
  e.u16();
  std::uint64_t entries = e.u16();
  e.u32();
  std::uint64_t cd_offset = e.u32();
  if ((entries == 0xFFFF || cd_offset == 0xFFFFFFFF) && eocd >= 20) {
    io::ByteReader loc(zip.substr(eocd - 20, 20), "zip64 locator");
    if (loc.u32() == kZip64Locator) {
      loc.u32();
      const auto rec = loc.u64();
      if (rec >= zip.size()) throw Error(Errc::CorruptFile, "zip64 record offset out of range");
      io::ByteReader z(zip.substr(rec), "zip64 end record");
      z.u32();
      z.u64();
      z.u16();
      z.u16();
      z.u32();
      z.u32();
      z.u64();
      entries = z.u64();
      z.u64();
      cd_offset = z.u64();
    }
  }
  if (cd_offset >= zip.size()) throw Error(Errc::CorruptFile, "central directory offset out of range");

  std::map<std::string, std::string> out;
  io::ByteReader cd(zip.substr(cd_offset), "zip central directory");
  for (std::uint64_t k = 0; k < entries; ++k) {
    if (cd.u32() != kCentralHeader) throw Error(Errc::CorruptFile, "bad central directory entry");
    cd.u16();
    cd.u16();
    cd.u16();
    const auto method = cd.u16();
    cd.u16();
    cd.u16();
    cd.u32();
    Zip64Sizes s{};
    s.compressed = cd.u32();
    s.uncompressed = cd.u32();
    const auto name_len = cd.u16(), extra_len = cd.u16(), comment_len = cd.u16();
    cd.u16();
    cd.u16();
    cd.u32();
    s.offset = cd.u32();
    std::string name(cd.bytes(name_len));
    apply_zip64(cd.bytes(extra_len), s, s.uncompressed == 0xFFFFFFFF, s.compressed == 0xFFFFFFFF,
                s.offset == 0xFFFFFFFF);
    cd.bytes(comment_len);

    if (s.offset + 30 > zip.size()) throw Error(Errc::CorruptFile, "member offset out of range");
    io::ByteReader lh(zip.substr(s.offset), "zip local header");
    if (lh.u32() != kLocalHeader) throw Error(Errc::CorruptFile, "bad local header for " + name);
    lh.bytes(22);
    const auto lname = lh.u16(), lextra = lh.u16();
    const auto data_at = s.offset + 30 + lname + lextra;
    if (data_at > zip.size() || s.compressed > zip.size() - data_at)
      throw Error(Errc::CorruptFile, "member data out of range for " + name);
    const auto data = zip.substr(data_at, s.compressed);

    std::string body;
    if (method == 0) body = std::string(data);
    else if (method == 8) body = inflate_raw(data, s.uncompressed);
    else throw Error(Errc::UnsupportedFormat, "zip compression method " + std::to_string(method));
    if (name.ends_with(".npy")) name.resize(name.size() - 4);
    out.emplace(std::move(name), std::move(body));
  }
  return out;
}

DatasetManifest import_pathmnist(const fs::path& npz, const fs::path& out_dir, const PathMnistImport& options) {
  const auto members = read_npz_members(io::read_file(npz.string()));
  const auto& names = pathmnist_class_names();
  DatasetManifest manifest;
  manifest.root = out_dir;

  for (const auto& [split, tag] : {std::pair{"train", SplitTag::Train}, std::pair{"val", SplitTag::Val},
                                   std::pair{"test", SplitTag::Test}}) {
    const auto img_it = members.find(std::string(split) + "_images");
    const auto lab_it = members.find(std::string(split) + "_labels");
    if (img_it == members.end() || lab_it == members.end())
      throw Error(Errc::CorruptFile, std::string("archive lacks ") + split + "_images or " + split + "_labels");
    const auto images = parse_npy(img_it->second);
    const auto labels = parse_npy(lab_it->second);
    if (images.shape.size() != 4 || images.shape[3] != 3)
      throw Error(Errc::UnsupportedFormat, std::string(split) + "_images is not an N x H x W x 3 array");
    const std::size_t n_all = images.shape[0], h = images.shape[1], w = images.shape[2];
    if (labels.count() != n_all) throw Error(Errc::CorruptFile, std::string(split) + " label count mismatch");
    const std::size_t n = options.max_per_split ? std::min(n_all, options.max_per_split) : n_all;

    const auto dir = out_dir / "images" / split;
    fs::create_directories(dir);
    std::vector<std::string> rel(n);
    std::vector<std::optional<Error>> errors(n);
    const auto digits = std::to_string(n_all).size();
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      try {
        Patch p(w, h);
        auto px = p.pixels();
        const auto base = i * h * w * 3;
        for (std::size_t k = 0; k < h * w; ++k)
          px[k] = {static_cast<std::uint8_t>(images.values[base + 3 * k]),
                   static_cast<std::uint8_t>(images.values[base + 3 * k + 1]),
                   static_cast<std::uint8_t>(images.values[base + 3 * k + 2])};
        std::string idx = std::to_string(i);
        idx.insert(0, digits - idx.size(), '0');
        rel[i] = "images/" + std::string(split) + "/" + idx + ".png";
        write_png(p, out_dir / rel[i]);
      } catch (const Error& e) {
        errors[i] = e;
      }
    }
    for (auto& e : errors)
      if (e) throw *e;
    for (std::size_t i = 0; i < n; ++i) {
      const auto label = labels.values[i];
      if (label < 0 || label >= static_cast<std::int64_t>(names.size()))
        throw Error(Errc::CorruptFile, "label " + std::to_string(label) + " outside the nine PathMNIST classes");
      manifest.records.push_back({rel[i], names[label], tag});
    }
  }
  save_manifest(manifest, out_dir / "manifest.csv");
  return manifest;
}

}  // namespace cpath
