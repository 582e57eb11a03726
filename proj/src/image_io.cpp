#include "cpath/image_io.hpp"

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "cpath/binary_io.hpp"
#include "cpath/error.hpp"

namespace cpath {

namespace {

// libpng and libjpeg report errors by longjmp. All C++ state touched after
// setjmp lives in these contexts, which are constructed before it.

struct PngContext {
  std::string_view data;
  std::size_t pos = 0;
  char message[256] = "";
  std::vector<unsigned char> pixels;
  std::vector<png_bytep> rows;
  std::string out;
};

void png_on_error(png_structp png, png_const_charp msg) {
  auto* ctx = static_cast<PngContext*>(png_get_error_ptr(png));
  std::snprintf(ctx->message, sizeof ctx->message, "%s", msg);
  png_longjmp(png, 1);
}

void png_on_warning(png_structp, png_const_charp) {}

void png_read_bytes(png_structp png, png_bytep out, png_size_t n) {
  auto* ctx = static_cast<PngContext*>(png_get_io_ptr(png));
  if (n > ctx->data.size() - ctx->pos) png_error(png, "truncated PNG data");
  std::memcpy(out, ctx->data.data() + ctx->pos, n);
  ctx->pos += n;
}

void png_write_bytes(png_structp png, png_bytep in, png_size_t n) {
  auto* ctx = static_cast<PngContext*>(png_get_io_ptr(png));
  ctx->out.append(reinterpret_cast<const char*>(in), n);
}

void png_flush_noop(png_structp) {}

Patch decode_png(std::string_view bytes, std::string_view source) {
  PngContext ctx;
  ctx.data = bytes;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &ctx, png_on_error, png_on_warning);
  if (!png) throw Error(Errc::CorruptImage, "cannot allocate PNG reader");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(Errc::CorruptImage, "cannot allocate PNG info");
  }

  png_uint_32 width = 0, height = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(Errc::CorruptImage, std::string(source) + ": " + ctx.message);
  }

  png_set_read_fn(png, &ctx, png_read_bytes);
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);

  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  if (png_get_channels(png, info) != 3 || png_get_bit_depth(png, info) != 8)
    png_error(png, "unexpected pixel layout after conversion");
  if (width == 0 || height == 0) png_error(png, "empty image");

  const std::size_t stride = png_get_rowbytes(png, info);
  ctx.pixels.resize(stride * height);
  ctx.rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) ctx.rows[y] = ctx.pixels.data() + y * stride;
  png_read_image(png, ctx.rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Patch patch(width, height);
  auto px = patch.pixels();
  for (png_uint_32 y = 0; y < height; ++y)
    for (png_uint_32 x = 0; x < width; ++x) {
      const unsigned char* p = ctx.rows[y] + 3 * x;
      px[static_cast<std::size_t>(y) * width + x] = {p[0], p[1], p[2]};
    }
  return patch;
}

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX] = "";
};

void jpeg_on_error(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_quiet(j_common_ptr, int) {}

struct JpegContext {
  jpeg_decompress_struct cinfo{};
  JpegError err{};
  std::vector<unsigned char> pixels;
  std::string unsupported;
};

Patch decode_jpeg(std::string_view bytes, std::string_view source) {
  JpegContext ctx;
  ctx.cinfo.err = jpeg_std_error(&ctx.err.mgr);
  ctx.err.mgr.error_exit = jpeg_on_error;
  ctx.err.mgr.emit_message = jpeg_quiet;
  if (setjmp(ctx.err.jump)) {
    jpeg_destroy_decompress(&ctx.cinfo);
    if (!ctx.unsupported.empty()) throw Error(Errc::UnsupportedFormat, std::string(source) + ": " + ctx.unsupported);
    throw Error(Errc::CorruptImage, std::string(source) + ": " + ctx.err.message);
  }
  jpeg_create_decompress(&ctx.cinfo);
  jpeg_mem_src(&ctx.cinfo, reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&ctx.cinfo, TRUE);
  if (ctx.cinfo.num_components != 1 && ctx.cinfo.num_components != 3) {
    ctx.unsupported = "JPEG with " + std::to_string(ctx.cinfo.num_components) + " components";
    std::longjmp(ctx.err.jump, 1);
  }
  ctx.cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&ctx.cinfo);
  const std::size_t width = ctx.cinfo.output_width, height = ctx.cinfo.output_height;
  ctx.pixels.resize(width * height * 3);
  while (ctx.cinfo.output_scanline < ctx.cinfo.output_height) {
    unsigned char* row = ctx.pixels.data() + static_cast<std::size_t>(ctx.cinfo.output_scanline) * width * 3;
    jpeg_read_scanlines(&ctx.cinfo, &row, 1);
  }
  jpeg_finish_decompress(&ctx.cinfo);
  jpeg_destroy_decompress(&ctx.cinfo);

  Patch patch(width, height);
  auto px = patch.pixels();
  for (std::size_t i = 0; i < width * height; ++i)
    px[i] = {ctx.pixels[3 * i], ctx.pixels[3 * i + 1], ctx.pixels[3 * i + 2]};
  return patch;
}

bool is_png(std::string_view b) { return b.size() >= 8 && b.substr(0, 8) == std::string_view("\x89PNG\r\n\x1a\n", 8); }
bool is_jpeg(std::string_view b) { return b.size() >= 3 && b.substr(0, 3) == "\xFF\xD8\xFF"; }

}  // namespace

Patch decode_patch(std::string_view bytes, std::string_view source) {
  if (is_png(bytes)) return decode_png(bytes, source);
  if (is_jpeg(bytes)) return decode_jpeg(bytes, source);
  throw Error(Errc::UnsupportedFormat, std::string(source) + ": neither PNG nor JPEG");
}

Patch decode_patch_file(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path.string());
  return decode_patch(bytes, path.string());
}

std::string encode_png(const Patch& patch) {
  if (patch.empty()) throw Error(Errc::EmptyPatch, "cannot encode an empty patch");
  PngContext ctx;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &ctx, png_on_error, png_on_warning);
  if (!png) throw Error(Errc::Io, "cannot allocate PNG writer");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(Errc::Io, "cannot allocate PNG info");
  }
  const auto width = static_cast<png_uint_32>(patch.width()), height = static_cast<png_uint_32>(patch.height());
  ctx.pixels.resize(static_cast<std::size_t>(width) * height * 3);
  const auto src = patch.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    ctx.pixels[3 * i] = src[i].r;
    ctx.pixels[3 * i + 1] = src[i].g;
    ctx.pixels[3 * i + 2] = src[i].b;
  }
  ctx.rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) ctx.rows[y] = ctx.pixels.data() + static_cast<std::size_t>(y) * width * 3;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(Errc::Io, std::string("PNG encoding failed: ") + ctx.message);
  }
  png_set_write_fn(png, &ctx, png_write_bytes, png_flush_noop);
  png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, ctx.rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return std::move(ctx.out);
}

void write_png(const Patch& patch, const std::filesystem::path& path) { io::write_file(path.string(), encode_png(patch)); }

std::string encode_jpeg(const Patch& patch, int quality) {
  if (patch.empty()) throw Error(Errc::EmptyPatch, "cannot encode an empty patch");
  struct Ctx {
    jpeg_compress_struct cinfo{};
    JpegError err{};
    std::vector<unsigned char> pixels;
    unsigned char* out = nullptr;
    unsigned long out_size = 0;
  } ctx;
  ctx.cinfo.err = jpeg_std_error(&ctx.err.mgr);
  ctx.err.mgr.error_exit = jpeg_on_error;
  const auto src = patch.pixels();
  ctx.pixels.resize(src.size() * 3);
  for (std::size_t i = 0; i < src.size(); ++i) {
    ctx.pixels[3 * i] = src[i].r;
    ctx.pixels[3 * i + 1] = src[i].g;
    ctx.pixels[3 * i + 2] = src[i].b;
  }
  if (setjmp(ctx.err.jump)) {
    jpeg_destroy_compress(&ctx.cinfo);
    std::free(ctx.out);
    throw Error(Errc::Io, std::string("JPEG encoding failed: ") + ctx.err.message);
  }
  jpeg_create_compress(&ctx.cinfo);
  jpeg_mem_dest(&ctx.cinfo, &ctx.out, &ctx.out_size);
  ctx.cinfo.image_width = static_cast<JDIMENSION>(patch.width());
  ctx.cinfo.image_height = static_cast<JDIMENSION>(patch.height());
  ctx.cinfo.input_components = 3;
  ctx.cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&ctx.cinfo);
  jpeg_set_quality(&ctx.cinfo, quality, TRUE);
  jpeg_start_compress(&ctx.cinfo, TRUE);
  while (ctx.cinfo.next_scanline < ctx.cinfo.image_height) {
    unsigned char* row = ctx.pixels.data() + static_cast<std::size_t>(ctx.cinfo.next_scanline) * patch.width() * 3;
    jpeg_write_scanlines(&ctx.cinfo, &row, 1);
  }
  jpeg_finish_compress(&ctx.cinfo);
  jpeg_destroy_compress(&ctx.cinfo);
  std::string out(reinterpret_cast<const char*>(ctx.out), ctx.out_size);
  std::free(ctx.out);
  return out;
}

}  // namespace cpath
