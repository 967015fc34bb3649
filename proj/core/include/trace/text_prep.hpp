#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace trace {

// Classic Porter stemmer (reference-implementation behavior). Input is
// expected lowercase; words of length <= 2 pass through unchanged.
std::string porter_stem(std::string_view word);

// Shipped stop-word list (the 33-entry Lucene English default).
const std::unordered_set<std::string>& stop_words();

// Full preprocessing pipeline: strip URLs, strip markup tags and code-fence
// markers, split on non-alphanumeric and identifier case boundaries,
// lowercase, drop stop words, stem. Emitted terms are fixed points of the
// pipeline, so preprocess(join(preprocess(x))) == preprocess(x).
std::vector<std::string> preprocess_text(std::string_view raw);

}  // namespace trace
