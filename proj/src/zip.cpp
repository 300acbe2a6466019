#include "quarry/zip.hpp"

#include <zlib.h>

#include <cstdint>
#include <cstring>

#include "quarry/docmodel.hpp"

namespace quarry {

namespace {

constexpr std::uint32_t kEndOfCentralDir = 0x06054b50;
constexpr std::uint32_t kCentralHeader = 0x02014b50;
constexpr std::uint32_t kLocalHeader = 0x04034b50;

std::uint16_t u16(std::string_view s, std::size_t at) {
  if (at + 2 > s.size()) throw LoadError("zip: truncated archive");
  return static_cast<std::uint16_t>(static_cast<unsigned char>(s[at]) |
                                    (static_cast<unsigned char>(s[at + 1]) << 8));
}

std::uint32_t u32(std::string_view s, std::size_t at) {
  return static_cast<std::uint32_t>(u16(s, at)) |
         (static_cast<std::uint32_t>(u16(s, at + 2)) << 16);
}

std::string inflate_raw(std::string_view data, std::size_t expected) {
  std::string out(expected, '\0');
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw LoadError("zip: inflate init failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  int rc = inflate(&zs, Z_FINISH);
  std::size_t produced = zs.total_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || produced != expected) throw LoadError("zip: corrupt deflate stream");
  return out;
}

}  // namespace

std::map<std::string, std::string> read_zip(std::string_view zip) {
  if (zip.size() < 22) throw LoadError("zip: archive too small");
  // The end record sits in the last 22 bytes plus an optional comment (< 64 KiB).
  std::size_t eocd = std::string_view::npos;
  std::size_t lowest = zip.size() > 22 + 0xFFFF ? zip.size() - 22 - 0xFFFF : 0;
  for (std::size_t i = zip.size() - 22 + 1; i-- > lowest;) {
    if (u32(zip, i) == kEndOfCentralDir) {
      eocd = i;
      break;
    }
  }
  if (eocd == std::string_view::npos) throw LoadError("zip: end of central directory not found");

  std::uint16_t count = u16(zip, eocd + 10);
  std::uint32_t dir_offset = u32(zip, eocd + 16);
  if (dir_offset == 0xFFFFFFFFu) throw LoadError("zip: zip64 archives are not supported");

  std::map<std::string, std::string> entries;
  std::size_t pos = dir_offset;
  for (std::uint16_t i = 0; i < count; ++i) {
    if (u32(zip, pos) != kCentralHeader) throw LoadError("zip: bad central directory entry");
    std::uint16_t method = u16(zip, pos + 10);
    std::uint32_t crc = u32(zip, pos + 16);
    std::uint32_t csize = u32(zip, pos + 20);
    std::uint32_t usize = u32(zip, pos + 24);
    std::uint16_t name_len = u16(zip, pos + 28);
    std::uint16_t extra_len = u16(zip, pos + 30);
    std::uint16_t comment_len = u16(zip, pos + 32);
    std::uint32_t local = u32(zip, pos + 42);
    if (pos + 46 + name_len > zip.size()) throw LoadError("zip: truncated central directory");
    std::string name(zip.substr(pos + 46, name_len));
    pos += 46 + name_len + extra_len + comment_len;

    if (!name.empty() && name.back() == '/') continue;  // directory

    if (u32(zip, local) != kLocalHeader) throw LoadError("zip: bad local header for " + name);
    std::size_t data_at = local + 30 + u16(zip, local + 26) + u16(zip, local + 28);
    if (data_at + csize > zip.size()) throw LoadError("zip: truncated entry " + name);
    std::string_view raw = zip.substr(data_at, csize);

    std::string bytes;
    if (method == 0) {
      bytes = std::string(raw);
    } else if (method == 8) {
      bytes = inflate_raw(raw, usize);
    } else {
      throw LoadError("zip: unsupported compression method " + std::to_string(method) + " for " +
                      name);
    }
    auto actual = crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()),
                        static_cast<uInt>(bytes.size()));
    if (actual != crc) throw LoadError("zip: checksum mismatch for " + name);
    entries.emplace(std::move(name), std::move(bytes));
  }
  return entries;
}

}  // namespace quarry
