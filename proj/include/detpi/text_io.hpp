#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "detpi/circuit.hpp"
#include "detpi/numeric.hpp"

namespace detpi {

class FormatError : public std::runtime_error {
 public:
  FormatError(std::size_t offset, const std::string& msg)
      : std::runtime_error("byte " + std::to_string(offset) + ": " + msg), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Whitespace separated token reader that remembers byte offsets.
class TextReader {
 public:
  explicit TextReader(std::string_view text) : text_(text) {}

  std::size_t offset() const { return pos_; }
  bool at_end();
  std::string_view token();
  std::string_view peek();
  void expect(std::string_view word);
  std::uint64_t read_u64();
  std::uint32_t read_u32();
  Int read_int();
  [[noreturn]] void fail(const std::string& msg) const { throw FormatError(tok_start_, msg); }

 private:
  void skip_space();
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t tok_start_ = 0;
};

std::string encode(const Circuit& c);
void encode_to(std::string& out, const Circuit& c);
Circuit decode(std::string_view text);
Circuit read_circuit(TextReader& in);

std::string to_dot(const Circuit& c, const std::string& name = "circuit");

}  // namespace detpi
