#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cuescore {

inline constexpr std::size_t kNumPhones = 41;

/// 39 ARPAbet monophones followed by SIL and UNK. Indices are fixed forever:
/// they address posterior columns and the phone embedding table.
class PhonemeInventory {
 public:
  static constexpr std::array<std::string_view, kNumPhones> kSymbols = {
      "AA", "AE", "AH", "AO", "AW", "AY", "B",  "CH", "D",  "DH", "EH", "ER", "EY", "F",
      "G",  "HH", "IH", "IY", "JH", "K",  "L",  "M",  "N",  "NG", "OW", "OY", "P",  "R",
      "S",  "SH", "T",  "TH", "UH", "UW", "V",  "W",  "Y",  "Z",  "ZH", "SIL", "UNK"};

  static constexpr std::size_t size() { return kNumPhones; }

  static std::optional<std::size_t> find(std::string_view symbol);

  /// Index of a symbol; throws InventoryError for unknown symbols.
  static std::size_t index(std::string_view symbol);

  static std::string_view symbol(std::size_t index);

  static bool contains(std::string_view symbol) { return find(symbol).has_value(); }

  /// Voiced phones are produced with vocal-fold vibration (vowels, glides, nasals, voiced obstruents).
  static bool is_voiced(std::string_view symbol);

  static bool is_vowel(std::string_view symbol);
};

/// Splits a whitespace-separated phone string and validates every symbol.
std::vector<std::string> parse_phone_string(std::string_view text);

/// Maps symbols to indices, throwing InventoryError on the first unknown one.
std::vector<std::size_t> phone_indices(std::span<const std::string> phones);

}  // namespace cuescore
