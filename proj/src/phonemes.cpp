#include "cuescore/phonemes.hpp"

#include <algorithm>
#include <sstream>

#include "cuescore/error.hpp"

namespace cuescore {

namespace {

constexpr std::array<std::string_view, 15> kVowels = {"AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER",
                                                      "EY", "IH", "IY", "OW", "OY", "UH", "UW"};
constexpr std::array<std::string_view, 9> kVoicelessConsonants = {"CH", "F", "HH", "K", "P",
                                                                  "S",  "SH", "T", "TH"};

}  // namespace

std::optional<std::size_t> PhonemeInventory::find(std::string_view symbol) {
  const auto it = std::find(kSymbols.begin(), kSymbols.end(), symbol);
  if (it == kSymbols.end()) return std::nullopt;
  return static_cast<std::size_t>(it - kSymbols.begin());
}

std::size_t PhonemeInventory::index(std::string_view symbol) {
  if (auto idx = find(symbol)) return *idx;
  throw InventoryError("unknown phone symbol '" + std::string(symbol) + "'");
}

std::string_view PhonemeInventory::symbol(std::size_t index) {
  if (index >= kNumPhones) {
    throw InventoryError("phone index " + std::to_string(index) + " out of range");
  }
  return kSymbols[index];
}

bool PhonemeInventory::is_vowel(std::string_view symbol) {
  return std::find(kVowels.begin(), kVowels.end(), symbol) != kVowels.end();
}

bool PhonemeInventory::is_voiced(std::string_view symbol) {
  if (symbol == "SIL" || symbol == "UNK") return false;
  return std::find(kVoicelessConsonants.begin(), kVoicelessConsonants.end(), symbol) ==
         kVoicelessConsonants.end();
}

std::vector<std::string> parse_phone_string(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<std::string> phones;
  for (std::string tok; in >> tok;) {
    PhonemeInventory::index(tok);
    phones.push_back(std::move(tok));
  }
  return phones;
}

std::vector<std::size_t> phone_indices(std::span<const std::string> phones) {
  std::vector<std::size_t> out;
  out.reserve(phones.size());
  for (const auto& p : phones) out.push_back(PhonemeInventory::index(p));
  return out;
}

}  // namespace cuescore
