#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace prism::corpus {

/// The five SEC filing kinds a document-ranking sample orders. Declaration
/// order is the canonical order used for deterministic tie-breaking.
enum class DocType { Def14A, TenK, TenQ, EightK, Earnings };

inline constexpr std::array<DocType, 5> kAllDocTypes = {
    DocType::Def14A, DocType::TenK, DocType::TenQ, DocType::EightK, DocType::Earnings,
};

std::string_view to_string(DocType type);

/// Parses the canonical form ("DEF 14A", "10-K", "10-Q", "8-K", "Earnings").
std::optional<DocType> doc_type_from_string(std::string_view text);

inline constexpr std::size_t doc_type_ordinal(DocType type) {
    return static_cast<std::size_t>(type);
}

}  // namespace prism::corpus
