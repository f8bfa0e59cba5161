#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "termharm/termbase.hpp"

namespace termharm {

// Splits on whitespace and punctuation. A hyphen between two word characters
// stays inside the token ("real-time"). Case is preserved; case folding is a
// lookup concern. UTF-8 letters count as word characters, UTF-8 dashes, quotes
// and similar typographic punctuation as separators.
std::vector<std::string> tokenize(std::string_view text);

enum class TokenInput { Entries, Terms, Definitions };

std::string_view to_string(TokenInput input);
std::optional<TokenInput> parse_token_input(std::string_view name);

bool is_stopword(std::string_view token);

// Bag of tokens of an entry: terms (in order) then the definition, or only one
// of the two. Duplicates are kept.
std::vector<std::string> entry_token_bag(const TerminologicalEntry& entry, TokenInput input,
                                         bool drop_stopwords = false);

}  // namespace termharm
