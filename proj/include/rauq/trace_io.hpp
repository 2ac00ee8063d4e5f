#pragma once

#include <zlib.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rauq/error.hpp"
#include "rauq/format.hpp"
#include "rauq/trace.hpp"

namespace rauq {

// Splits a byte stream into LF-terminated lines, inflating it first when it
// starts with the gzip magic bytes 0x1F 0x8B.
class LineSource {
 public:
  explicit LineSource(std::istream& in) : in_(in) {}

  LineSource(const LineSource&) = delete;
  LineSource& operator=(const LineSource&) = delete;

  ~LineSource() {
    if (inflating_) inflateEnd(&zs_);
  }

  bool next(std::string& line) {
    for (;;) {
      const auto nl = text_.find('\n', pos_);
      if (nl != std::string::npos) {
        line.assign(text_, pos_, nl - pos_);
        pos_ = nl + 1;
        strip_cr(line);
        return true;
      }
      if (!fill()) {
        if (pos_ >= text_.size()) return false;
        line.assign(text_, pos_, std::string::npos);
        pos_ = text_.size();
        strip_cr(line);
        return true;
      }
    }
  }

 private:
  static void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
  }

  // Appends more decoded text; false at end of input.
  bool fill() {
    if (pos_ > 0) {
      text_.erase(0, pos_);
      pos_ = 0;
    }
    if (!read_raw()) return false;
    if (!sniffed_) {
      sniffed_ = true;
      if (raw_len_ >= 2 && static_cast<unsigned char>(raw_[0]) == 0x1F &&
          static_cast<unsigned char>(raw_[1]) == 0x8B) {
        zs_ = z_stream{};
        if (inflateInit2(&zs_, 16 + MAX_WBITS) != Z_OK) throw IoError("cannot initialise gzip decoder");
        inflating_ = true;
      }
    }
    if (!inflating_) {
      text_.append(raw_.data(), raw_len_);
      return true;
    }
    zs_.next_in = reinterpret_cast<Bytef*>(raw_.data());
    zs_.avail_in = static_cast<uInt>(raw_len_);
    std::array<char, 1 << 16> out{};
    for (;;) {
      zs_.next_out = reinterpret_cast<Bytef*>(out.data());
      zs_.avail_out = static_cast<uInt>(out.size());
      const int rc = inflate(&zs_, Z_NO_FLUSH);
      if (rc != Z_OK && rc != Z_STREAM_END && rc != Z_BUF_ERROR) throw IoError("corrupt gzip stream");
      text_.append(out.data(), out.size() - zs_.avail_out);
      member_done_ = rc == Z_STREAM_END;
      if (member_done_) {
        // Concatenated members are legal gzip.
        if (zs_.avail_in == 0) break;
        inflateReset(&zs_);
        continue;
      }
      if (rc == Z_BUF_ERROR || (zs_.avail_in == 0 && zs_.avail_out != 0)) break;
    }
    return true;
  }

  bool read_raw() {
    raw_len_ = 0;
    if (in_) {
      in_.read(raw_.data(), static_cast<std::streamsize>(raw_.size()));
      raw_len_ = static_cast<std::size_t>(in_.gcount());
      if (in_.bad()) throw IoError("read failure");
    }
    if (raw_len_ == 0 && inflating_ && !member_done_) throw IoError("truncated gzip stream");
    return raw_len_ > 0;
  }

  std::istream& in_;
  std::array<char, 1 << 16> raw_{};
  std::size_t raw_len_ = 0;
  std::string text_;
  std::size_t pos_ = 0;
  bool sniffed_ = false;
  bool inflating_ = false;
  bool member_done_ = false;
  z_stream zs_{};
};

namespace detail {

using json = nlohmann::json;

inline const json& require(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end()) throw ValidationError(field, "missing");
  return *it;
}

inline std::string get_string(const json& j, const char* field) {
  const json& v = require(j, field);
  if (!v.is_string()) throw ValidationError(field, "expected a string");
  return v.get<std::string>();
}

inline std::int64_t get_int(const json& j, const char* field, std::int64_t fallback) {
  auto it = j.find(field);
  if (it == j.end()) return fallback;
  if (!it->is_number_integer()) throw ValidationError(field, "expected an integer");
  return it->get<std::int64_t>();
}

inline TraceFileHeader parse_header(const json& j) {
  if (!j.is_object()) throw UnsupportedFormatError("header line is not a JSON object");
  auto it = j.find("schema_version");
  if (it == j.end() || !it->is_string()) throw UnsupportedFormatError("header lacks schema_version");
  TraceFileHeader h;
  h.schema_version = it->get<std::string>();
  if (h.schema_version != kSchemaVersion) {
    throw UnsupportedFormatError("unsupported schema_version \"" + h.schema_version + "\"");
  }
  if (auto m = j.find("model_name"); m != j.end() && m->is_string()) h.model_name = m->get<std::string>();
  if (auto n = j.find("notes"); n != j.end() && n->is_string()) h.notes = n->get<std::string>();
  return h;
}

inline GenerationTrace parse_trace(const json& j) {
  if (!j.is_object()) throw ValidationError("record", "expected a JSON object");
  GenerationTrace t;
  t.id = get_string(j, "id");
  if (auto it = j.find("task"); it != j.end()) {
    if (!it->is_string()) throw ValidationError("task", "expected a string");
    t.task = it->get<std::string>();
  }
  t.prompt_len = get_int(j, "prompt_len", 0);
  const std::int64_t window = get_int(j, "k_window", 1);
  if (window < 1) throw ValidationError("k_window", "must be at least 1");
  t.k_window = static_cast<std::size_t>(window);

  const json& tokens = require(j, "tokens");
  if (!tokens.is_array()) throw ValidationError("tokens", "expected an array");
  t.tokens.reserve(tokens.size());
  for (const auto& tok : tokens) {
    if (!tok.is_string()) throw ValidationError("tokens", "expected strings");
    t.tokens.push_back(tok.get<std::string>());
  }

  const json& probs = require(j, "probs");
  if (!probs.is_array()) throw ValidationError("probs", "expected an array");
  t.probs.reserve(probs.size());
  for (const auto& p : probs) {
    if (!p.is_number()) throw ValidationError("probs", "expected numbers");
    t.probs.push_back(p.get<float>());
  }

  const json& attn = require(j, "attn");
  const std::size_t n = t.tokens.size();
  if (!attn.is_array() || attn.empty() || !attn[0].is_array()) {
    throw ValidationError("attn", "expected a non-empty [L][H][N][k_window] array");
  }
  t.num_layers = attn.size();
  t.num_heads = attn[0].size();
  t.attn.reserve(t.num_layers * t.num_heads * n * t.k_window);
  for (const auto& layer : attn) {
    if (!layer.is_array() || layer.size() != t.num_heads) throw ValidationError("attn", "ragged head dimension");
    for (const auto& head : layer) {
      if (!head.is_array() || head.size() != n) throw ValidationError("attn", "token dimension must equal len(tokens)");
      for (const auto& row : head) {
        if (!row.is_array() || row.size() != t.k_window) {
          throw ValidationError("attn", "offset dimension must equal k_window");
        }
        for (const auto& a : row) {
          if (!a.is_number()) throw ValidationError("attn", "expected numbers");
          t.attn.push_back(a.get<float>());
        }
      }
    }
  }

  if (auto it = j.find("quality"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) throw ValidationError("quality", "expected a number");
    t.quality = it->get<double>();
  }
  validate(t);
  return t;
}

inline void append_json_string(std::string& out, const std::string& s) {
  out += json(s).dump(-1, ' ', false, json::error_handler_t::replace);
}

}  // namespace detail

inline std::string header_to_json(const TraceFileHeader& h) {
  std::string out = "{\"schema_version\":";
  detail::append_json_string(out, h.schema_version);
  out += ",\"model_name\":";
  detail::append_json_string(out, h.model_name);
  out += ",\"notes\":";
  detail::append_json_string(out, h.notes);
  out += '}';
  return out;
}

// One NDJSON line (without the trailing LF). Floats use the shortest text
// that reparses to the same 32-bit value.
inline std::string trace_to_json(const GenerationTrace& t) {
  std::string out;
  out.reserve(64 + t.attn.size() * 8);
  out += "{\"id\":";
  detail::append_json_string(out, t.id);
  out += ",\"task\":";
  detail::append_json_string(out, t.task);
  out += ",\"prompt_len\":";
  out += std::to_string(t.prompt_len);
  out += ",\"k_window\":";
  out += std::to_string(t.k_window);
  out += ",\"tokens\":[";
  for (std::size_t i = 0; i < t.tokens.size(); ++i) {
    if (i) out += ',';
    detail::append_json_string(out, t.tokens[i]);
  }
  out += "],\"probs\":[";
  for (std::size_t i = 0; i < t.probs.size(); ++i) {
    if (i) out += ',';
    append_number(out, t.probs[i]);
  }
  out += "],\"attn\":[";
  const std::size_t n = t.length();
  for (std::size_t l = 0; l < t.num_layers; ++l) {
    if (l) out += ',';
    out += '[';
    for (std::size_t h = 0; h < t.num_heads; ++h) {
      if (h) out += ',';
      out += '[';
      for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ',';
        out += '[';
        for (std::size_t k = 1; k <= t.k_window; ++k) {
          if (k > 1) out += ',';
          append_number(out, t.attention(l, h, i, k));
        }
        out += ']';
      }
      out += ']';
    }
    out += ']';
  }
  out += ']';
  if (t.quality) {
    out += ",\"quality\":";
    append_number(out, *t.quality);
  }
  out += '}';
  return out;
}

// Lazily yields validated traces from an NDJSON stream.
//
// Errors thrown by next() carry the 1-based line number; the offending line
// is consumed first, so a caller may catch and keep reading.
class TraceReader {
 public:
  explicit TraceReader(std::istream& in) : lines_(in) {
    std::string line;
    while (lines_.next(line)) {
      ++line_no_;
      if (is_blank(line)) continue;
      detail::json j;
      try {
        j = detail::json::parse(line);
      } catch (const detail::json::parse_error& e) {
        throw FormatError(line_no_, std::string("malformed header JSON: ") + e.what());
      }
      header_ = detail::parse_header(j);
      return;
    }
    // A zero-byte file carries no traces.
  }

  const TraceFileHeader& header() const noexcept { return header_; }

  // Line number of the most recently consumed line.
  std::size_t line() const noexcept { return line_no_; }

  std::optional<GenerationTrace> next() {
    std::string line;
    while (lines_.next(line)) {
      ++line_no_;
      if (is_blank(line)) continue;
      detail::json j;
      try {
        j = detail::json::parse(line);
      } catch (const detail::json::parse_error& e) {
        throw FormatError(line_no_, std::string("malformed JSON: ") + e.what());
      }
      try {
        return detail::parse_trace(j);
      } catch (const ValidationError& e) {
        throw e.at_line(line_no_);
      } catch (const detail::json::exception& e) {
        throw FormatError(line_no_, e.what());
      }
    }
    return std::nullopt;
  }

 private:
  static bool is_blank(const std::string& s) {
    return s.find_first_not_of(" \t") == std::string::npos;
  }

  LineSource lines_;
  TraceFileHeader header_;
  std::size_t line_no_ = 0;
};

inline std::vector<GenerationTrace> read_traces(std::istream& in, TraceFileHeader* header = nullptr) {
  TraceReader reader(in);
  std::vector<GenerationTrace> out;
  while (auto t = reader.next()) out.push_back(std::move(*t));
  if (header) *header = reader.header();
  return out;
}

inline std::vector<GenerationTrace> read_trace_file(const std::string& path, TraceFileHeader* header = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_traces(in, header);
}

inline void write_traces(std::span<const GenerationTrace> traces, std::ostream& out,
                         const TraceFileHeader& header = {}) {
  out << header_to_json(header) << '\n';
  for (const auto& t : traces) out << trace_to_json(t) << '\n';
  out.flush();
  if (!out) throw IoError("write failure");
}

// Writes a trace file, gzip-compressed when `path` ends in ".gz".
inline void write_trace_file(const std::string& path, std::span<const GenerationTrace> traces,
                             const TraceFileHeader& header = {}) {
  const bool gz = path.size() >= 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
  if (!gz) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_traces(traces, out, header);
    return;
  }
  std::unique_ptr<gzFile_s, int (*)(gzFile)> f(gzopen(path.c_str(), "wb"), &gzclose);
  if (!f) throw IoError("cannot open " + path + " for writing");
  auto put = [&](const std::string& line) {
    if (gzwrite(f.get(), line.data(), static_cast<unsigned>(line.size())) != static_cast<int>(line.size()) ||
        gzputc(f.get(), '\n') == -1) {
      throw IoError("write failure on " + path);
    }
  };
  put(header_to_json(header));
  for (const auto& t : traces) put(trace_to_json(t));
  if (gzclose(f.release()) != Z_OK) throw IoError("write failure on " + path);
}

}  // namespace rauq
