#include "fisheyegt/image_io.hpp"

#include <fmt/format.h>
#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "fisheyegt/binary_io.hpp"

namespace fisheyegt {
namespace fs = std::filesystem;

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// libpng reports errors through longjmp; the message is parked here first.
struct PngErrorSink {
  std::string message;
};

void png_error_handler(png_structp png, png_const_charp msg) {
  auto* sink = static_cast<PngErrorSink*>(png_get_error_ptr(png));
  if (sink != nullptr) sink->message = msg;
  png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

class PngReader {
 public:
  explicit PngReader(const fs::path& path) : path_(path) {
    file_.reset(std::fopen(path.c_str(), "rb"));
    if (!file_) throw FormatError(fmt::format("cannot open PNG {}", path.string()));
    png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, &sink_, png_error_handler,
                                  png_warning_handler);
    if (png_ == nullptr) throw FormatError("png_create_read_struct failed");
    info_ = png_create_info_struct(png_);
    if (info_ == nullptr) throw FormatError("png_create_info_struct failed");
  }
  ~PngReader() { png_destroy_read_struct(&png_, &info_, nullptr); }
  PngReader(const PngReader&) = delete;
  PngReader& operator=(const PngReader&) = delete;

  PngImage read() {
    png_uint_32 width = 0;
    png_uint_32 height = 0;
    int bit_depth = 0;
    int color_type = 0;
    int channels = 0;
    Raster8 image8;
    Raster16 image16;
    std::vector<png_bytep> rows;

    if (setjmp(png_jmpbuf(png_))) {
      throw FormatError(fmt::format("invalid PNG {}: {}", path_.string(), sink_.message));
    }
    png_init_io(png_, file_.get());
    png_read_info(png_, info_);
    png_get_IHDR(png_, info_, &width, &height, &bit_depth, &color_type, nullptr, nullptr,
                 nullptr);
    if (bit_depth < 8) {
      if (color_type == PNG_COLOR_TYPE_GRAY) {
        png_set_expand_gray_1_2_4_to_8(png_);
      } else {
        png_set_packing(png_);
      }
    }
    if (bit_depth == 16) png_set_swap(png_);
    png_read_update_info(png_, info_);
    channels = png_get_channels(png_, info_);
    bit_depth = png_get_bit_depth(png_, info_);

    rows.resize(height);
    if (bit_depth == 16) {
      image16 = Raster16(static_cast<int>(width), static_cast<int>(height), channels);
      for (png_uint_32 y = 0; y < height; ++y) {
        rows[y] = reinterpret_cast<png_bytep>(image16.pixel(0, static_cast<int>(y)));
      }
    } else {
      image8 = Raster8(static_cast<int>(width), static_cast<int>(height), channels);
      for (png_uint_32 y = 0; y < height; ++y) {
        rows[y] = image8.pixel(0, static_cast<int>(y));
      }
    }
    png_read_image(png_, rows.data());
    png_read_end(png_, nullptr);
    if (bit_depth == 16) return image16;
    return image8;
  }

 private:
  fs::path path_;
  FilePtr file_;
  PngErrorSink sink_;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

class PngWriter {
 public:
  explicit PngWriter(const fs::path& path) : path_(path) {
    png_ = png_create_write_struct(PNG_LIBPNG_VER_STRING, &sink_, png_error_handler,
                                   png_warning_handler);
    if (png_ == nullptr) throw std::runtime_error("png_create_write_struct failed");
    info_ = png_create_info_struct(png_);
    if (info_ == nullptr) throw std::runtime_error("png_create_info_struct failed");
  }
  ~PngWriter() { png_destroy_write_struct(&png_, &info_); }
  PngWriter(const PngWriter&) = delete;
  PngWriter& operator=(const PngWriter&) = delete;

  // Encodes into memory; the caller writes the bytes atomically.
  std::vector<std::byte> write(int width, int height, int bit_depth, int color_type,
                               const std::vector<png_bytep>& rows,
                               std::span<const Rgb> palette = {}) {
    std::vector<png_color> colors;
    if (setjmp(png_jmpbuf(png_))) {
      throw std::runtime_error(fmt::format("cannot encode PNG {}: {}", path_.string(),
                                           sink_.message));
    }
    png_set_write_fn(png_, &buffer_, append_bytes, nullptr);
    png_set_compression_level(png_, 3);
    png_set_IHDR(png_, info_, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    if (!palette.empty()) {
      colors.reserve(palette.size());
      for (const auto& c : palette) colors.push_back(png_color{c.r, c.g, c.b});
      png_set_PLTE(png_, info_, colors.data(), static_cast<int>(colors.size()));
    }
    png_write_info(png_, info_);
    if (bit_depth == 16) png_set_swap(png_);
    png_write_image(png_, const_cast<png_bytepp>(rows.data()));
    png_write_end(png_, nullptr);
    return std::move(buffer_);
  }

 private:
  static void append_bytes(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<std::byte>*>(png_get_io_ptr(png));
    const auto* p = reinterpret_cast<const std::byte*>(data);
    out->insert(out->end(), p, p + length);
  }

  fs::path path_;
  PngErrorSink sink_;
  std::vector<std::byte> buffer_;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

int color_type_for(int channels) {
  switch (channels) {
    case 1: return PNG_COLOR_TYPE_GRAY;
    case 2: return PNG_COLOR_TYPE_GRAY_ALPHA;
    case 3: return PNG_COLOR_TYPE_RGB;
    case 4: return PNG_COLOR_TYPE_RGBA;
    default: throw DomainError(fmt::format("PNG cannot store {} channels", channels));
  }
}

template <typename T>
std::vector<png_bytep> row_pointers(const Raster<T>& image) {
  std::vector<png_bytep> rows(image.height());
  for (int y = 0; y < image.height(); ++y) {
    rows[y] = reinterpret_cast<png_bytep>(const_cast<T*>(image.pixel(0, y)));
  }
  return rows;
}

}  // namespace

PngImage read_png(const fs::path& path) { return PngReader(path).read(); }

Raster8 read_png8(const fs::path& path) {
  auto image = read_png(path);
  if (auto* r = std::get_if<Raster8>(&image)) return std::move(*r);
  throw FormatError(fmt::format("{}: expected an 8-bit PNG", path.string()));
}

Raster16 read_png16(const fs::path& path) {
  auto image = read_png(path);
  if (auto* r = std::get_if<Raster16>(&image)) return std::move(*r);
  throw FormatError(fmt::format("{}: expected a 16-bit PNG", path.string()));
}

void write_png(const fs::path& path, const Raster8& image) {
  PngWriter writer(path);
  write_file(path, writer.write(image.width(), image.height(), 8, color_type_for(image.channels()),
                                row_pointers(image)));
}

void write_png(const fs::path& path, const Raster16& image) {
  if (image.channels() != 1) throw DomainError("16-bit PNG output supports one channel");
  PngWriter writer(path);
  write_file(path, writer.write(image.width(), image.height(), 16, PNG_COLOR_TYPE_GRAY,
                                row_pointers(image)));
}

void write_palette_png(const fs::path& path, const Raster8& indices,
                       std::span<const Rgb> palette) {
  if (indices.channels() != 1) throw DomainError("palette PNG needs a single index channel");
  if (palette.empty() || palette.size() > 256) throw DomainError("palette size must be 1..256");
  for (auto v : indices.data()) {
    if (v >= palette.size()) {
      throw DomainError(fmt::format("index {} beyond the {}-entry palette", v, palette.size()));
    }
  }
  PngWriter writer(path);
  write_file(path, writer.write(indices.width(), indices.height(), 8, PNG_COLOR_TYPE_PALETTE,
                                row_pointers(indices), palette));
}

std::vector<std::byte> encode_fras(const RasterF& raster) {
  std::vector<std::byte> out;
  out.reserve(16 + raster.data().size() * sizeof(float));
  binary::Writer w(out);
  w.put_text("FRAS");
  w.put(static_cast<std::uint32_t>(raster.width()));
  w.put(static_cast<std::uint32_t>(raster.height()));
  w.put(static_cast<std::uint32_t>(raster.channels()));
  for (float v : raster.data()) w.put(v);
  return out;
}

RasterF decode_fras(std::span<const std::byte> bytes) {
  binary::Reader r(bytes, "FRAS");
  const auto magic = r.get_bytes(4);
  if (std::memcmp(magic.data(), "FRAS", 4) != 0) throw FormatError("FRAS: bad magic");
  const auto width = r.get<std::uint32_t>();
  const auto height = r.get<std::uint32_t>();
  const auto channels = r.get<std::uint32_t>();
  if (channels == 0 || width > (1u << 16) || height > (1u << 16) || channels > 16) {
    throw FormatError("FRAS: implausible dimensions");
  }
  const std::size_t count = std::size_t{width} * height * channels;
  if (r.remaining() != count * sizeof(float)) {
    throw FormatError("FRAS: payload size does not match the header");
  }
  RasterF raster(static_cast<int>(width), static_cast<int>(height), static_cast<int>(channels));
  for (auto& v : raster.data()) v = r.get<float>();
  return raster;
}

void write_fras(const fs::path& path, const RasterF& raster) {
  write_file(path, encode_fras(raster));
}

RasterF read_fras(const fs::path& path) { return decode_fras(read_file(path)); }

std::vector<std::byte> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(fmt::format("cannot open {}", path.string()));
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<std::byte> bytes(size);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!in) throw FormatError(fmt::format("cannot read {}", path.string()));
  return bytes;
}

void write_file(const fs::path& path, std::span<const std::byte> bytes) {
  fs::path tmp = path;
  tmp += ".part";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot create {}", tmp.string()));
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", tmp.string()));
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error(fmt::format("cannot rename into {}", path.string()));
  }
}

}  // namespace fisheyegt
