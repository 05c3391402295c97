#ifndef GASTMIX_TEXT_HPP
#define GASTMIX_TEXT_HPP

#include <cstdint>
#include <string>
#include <string_view>

namespace gastmix::text {

// Decodes the UTF-8 sequence starting at `pos` and advances `pos` past it.
// Invalid bytes decode to U+FFFD and advance by one byte.
char32_t decode_utf8(std::string_view s, std::size_t& pos);

void append_utf8(std::string& out, char32_t cp);

// Letter classification covers the Latin ranges seen in European review text
// (ASCII, Latin-1 supplement, Latin Extended-A/B, Latin Extended Additional).
bool is_letter(char32_t cp);
bool is_space(char32_t cp);
bool is_hyphen(char32_t cp);
bool is_upper(char32_t cp);

// Lowercase mapping for the ranges covered by is_letter. Identity elsewhere.
char32_t fold_char(char32_t cp);

// Per-codepoint case fold of a UTF-8 string.
std::string fold(std::string_view s);

// Canonical form used for sentence identity: compose common Latin
// base+combining-mark pairs, case-fold, collapse whitespace runs to a single
// space, trim. Not a full Unicode NFC pass; it covers the sequences that
// occur in Latin-script review text.
std::string normalize(std::string_view s);

// 64-bit content hash of normalize(s).
std::uint64_t content_hash(std::string_view s);

} // namespace gastmix::text

#endif
