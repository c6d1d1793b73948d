#include "somd/text.hpp"

#include <fstream>
#include <sstream>

#include "somd/error.hpp"

namespace somd {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t at = text.find(sep, pos);
    if (at == std::string_view::npos) {
      out.push_back(text.substr(pos));
      return out;
    }
    out.push_back(text.substr(pos, at - pos));
    pos = at + 1;
  }
}

namespace {
constexpr bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
}  // namespace

std::string_view trim(std::string_view text) {
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return text;
}

bool has_whitespace(std::string_view text) {
  for (char c : text)
    if (is_space(c)) return true;
  return false;
}

std::string to_lower_ascii(std::string_view text) {
  std::string out(text);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    throw Error(ErrorCode::FileNotFound, "file not found: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::EmptySentence: return "EmptySentence";
    case ErrorCode::InvalidIOB2: return "InvalidIOB2";
    case ErrorCode::OverlappingSpans: return "OverlappingSpans";
    case ErrorCode::SpanOutOfRange: return "SpanOutOfRange";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonMonotoneWordIndex: return "NonMonotoneWordIndex";
    case ErrorCode::GapInWordIndices: return "GapInWordIndices";
    case ErrorCode::AllZeroCounts: return "AllZeroCounts";
    case ErrorCode::EmptyBatchAfterFiltering: return "EmptyBatchAfterFiltering";
    case ErrorCode::EmptySupervision: return "EmptySupervision";
    case ErrorCode::IncompatibleTagSet: return "IncompatibleTagSet";
    case ErrorCode::SentenceCountMismatch: return "SentenceCountMismatch";
    case ErrorCode::TokenMismatch: return "TokenMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::Io: return "Io";
    case ErrorCode::ModelFormat: return "ModelFormat";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace somd
