#include "prism/doc_type.hpp"

namespace prism::corpus {

std::string_view to_string(DocType type) {
    switch (type) {
        case DocType::Def14A: return "DEF 14A";
        case DocType::TenK: return "10-K";
        case DocType::TenQ: return "10-Q";
        case DocType::EightK: return "8-K";
        case DocType::Earnings: return "Earnings";
    }
    return "?";
}

std::optional<DocType> doc_type_from_string(std::string_view text) {
    for (DocType type : kAllDocTypes) {
        if (text == to_string(type)) {
            return type;
        }
    }
    return std::nullopt;
}

}  // namespace prism::corpus
