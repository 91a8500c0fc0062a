#ifndef HEADLINER_SYNTHETIC_HPP_
#define HEADLINER_SYNTHETIC_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "headliner/corpus.hpp"

namespace headliner::synthetic {

// Rule-based compression records. Content words ("c<k>", tag CONTENT) and
// function words ("f<k>", tag FUNC) are mixed at random; the gold keeps a
// token iff its POS tag is CONTENT or it opens the sentence.
std::vector<Paragraph> compression_corpus(std::size_t count, std::uint64_t seed, int min_len = 4,
                                          int max_len = 14);

// Paragraphs of 2-5 sentences built from filler words ("n<k>") and a marked
// salient vocabulary ("s<k>"). One sentence per paragraph is dense in
// salient words; the summary lists the salient words that occur.
std::vector<Paragraph> summary_corpus(std::size_t count, std::uint64_t seed);

// Sentences over {a, b, c} following the cycle a -> b -> c -> a from a random
// start, 3-8 tokens long.
std::vector<Paragraph> cyclic_lm_corpus(std::size_t count, std::uint64_t seed);

}  // namespace headliner::synthetic

#endif  // HEADLINER_SYNTHETIC_HPP_
