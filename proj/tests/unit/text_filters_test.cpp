#include <gtest/gtest.h>

#include "support/test_support.hpp"
#include "weave/gzip.hpp"
#include "weave/stats.hpp"
#include "weave/text_filters.hpp"

using namespace weave;
using namespace weave::testing;

namespace {

NodeRule rule_of(std::string_view text) {
    const auto v = filter_node(text);
    EXPECT_FALSE(v.keep) << text;
    return v.rule;
}

Document doc_with(std::size_t nodes, std::size_t chars_each, std::size_t extra_chars = 0) {
    std::vector<Node> n;
    for (std::size_t i = 0; i < nodes; ++i) n.emplace_back(text(std::string(chars_each + (i == 0 ? extra_chars : 0), 'a')));
    return make_doc("http://d.test/", std::move(n));
}

}  // namespace

TEST(LatinScript, Examples) {
    EXPECT_TRUE(is_latin_script("hello"));
    EXPECT_FALSE(is_latin_script("привет"));
    EXPECT_FALSE(is_latin_script("abcпри"));
    EXPECT_TRUE(is_latin_script("abcdпри"));
    EXPECT_FALSE(is_latin_script(""));
    EXPECT_FALSE(is_latin_script("1234 !!"));
    EXPECT_TRUE(is_latin_script("12 ab 34"));
}

TEST(NodeFilter, ReferenceExamples) {
    EXPECT_EQ(rule_of(""), NodeRule::empty);
    EXPECT_EQ(rule_of("Call 555-1234 x99 room 41"), NodeRule::digit_ratio);
    EXPECT_TRUE(filter_node("This is a normal sentence about gardening.").keep);
    EXPECT_EQ(rule_of("FOLLOW US ON JAVASCRIPT"), NodeRule::caps_ratio);
}

TEST(NodeFilter, MinBytesByScript) {
    EXPECT_EQ(rule_of("abcd"), NodeRule::min_bytes);
    EXPECT_TRUE(filter_node("abcde").keep);
    // Cyrillic letters are 2 bytes: 7 letters = 14 bytes, 8 = 16 bytes.
    EXPECT_EQ(rule_of("абвгдеж"), NodeRule::min_bytes);
    EXPECT_TRUE(filter_node("абвгдежз").keep);
}

TEST(NodeFilter, DigitRatioBoundary) {
    // 6 digits of 20 scalars is exactly 0.30 and stays; 7 of 21 fires.
    EXPECT_TRUE(filter_node("abcdefghijklm 123456").keep);
    EXPECT_EQ(rule_of("abcdefghijklm 1234567"), NodeRule::digit_ratio);
}

TEST(NodeFilter, Dates) {
    EXPECT_TRUE(filter_node("Posted on 2023-01-15 by the editor of this local paper").keep);
    EXPECT_EQ(rule_of("From 2023-01-15 until March 3, 2024 the shop will be closed for renovation works"), NodeRule::dates);
    EXPECT_EQ(rule_of("Between 3 March 2021 and 4 April 2022 only"), NodeRule::dates);
    DateMatcher none({});
    EXPECT_EQ(none.count("2023-01-15 2023-01-16"), 0u);
}

TEST(NodeFilter, EachRuleIndependently) {
    EXPECT_EQ(rule_of("Lorem Ipsum dolor sit amet"), NodeRule::lorem_ipsum);
    EXPECT_EQ(rule_of("hello -- ** ++ == world"), NodeRule::nonalpha_ratio);
    EXPECT_EQ(rule_of("function body { return }"), NodeRule::curly_braces);
    EXPECT_EQ(rule_of("a < b and c > d and e < f"), NodeRule::angle_symbols);
    EXPECT_TRUE(filter_node("alpha < beta and gamma > delta").keep);
    EXPECT_EQ(rule_of("please Follow us on the web"), NodeRule::banned_substring);
    EXPECT_EQ(rule_of("enable javascript now"), NodeRule::banned_substring);
    EXPECT_EQ(rule_of("copyright the owners"), NodeRule::banned_substring);
    EXPECT_EQ(rule_of("All content © the owners"), NodeRule::banned_substring);
    EXPECT_EQ(rule_of("Newsletter"), NodeRule::banned_exact);
    EXPECT_EQ(rule_of("  Share "), NodeRule::banned_exact);
    EXPECT_TRUE(filter_node("share this").keep);
    EXPECT_EQ(rule_of("aaaaab"), NodeRule::char_dominance);
}

TEST(NodeFilter, NonAlphaRatioBoundary) {
    // 9 non-whitespace scalars with 3 non-alphabetic: exactly 1/3 > 0.33 fires.
    EXPECT_EQ(rule_of("abc def !!."), NodeRule::nonalpha_ratio);
    // 4 of 13 is 0.307.
    EXPECT_TRUE(filter_node("abcd efghi !!.x").keep);
}

TEST(NodeFilter, CapsRatioBoundary) {
    // 2 upper of 10 letters is 0.2, not above.
    EXPECT_TRUE(filter_node("Hello World").keep);
    EXPECT_EQ(rule_of("HEllo World"), NodeRule::caps_ratio);
}

TEST(NodeFilter, CharDominanceBoundary) {
    // 'a' is 3 of 9 scalars (1/3, not above 0.33 * 9 = 2.97): fires.
    EXPECT_EQ(rule_of("a bacadef"), NodeRule::char_dominance);
    EXPECT_TRUE(filter_node("a bcadefgh").keep);
}

TEST(NodeFilter, RuleOrderPairs) {
    EXPECT_EQ(rule_of("Ab 1234 5678 cd"), NodeRule::digit_ratio);             // also nonalpha
    EXPECT_EQ(rule_of("lorem ipsum { }"), NodeRule::lorem_ipsum);            // also braces
    EXPECT_EQ(rule_of("{ Follow us now }"), NodeRule::curly_braces);         // also banned
    EXPECT_EQ(rule_of("SHARE"), NodeRule::caps_ratio);                       // also exact
    EXPECT_EQ(rule_of("Copyright COPYRIGHT"), NodeRule::banned_substring);   // also caps
}

TEST(Clean, ReferenceExamples) {
    EXPECT_EQ(clean_node("see https://x.io/a now"), "see now");
    EXPECT_EQ(clean_node("wow!!!???"), "wow!?");
    EXPECT_EQ(clean_node("no specials"), "no specials");
}

TEST(Clean, UrlsAndRuns) {
    EXPECT_EQ(clean_node("go to www.example.com/page today"), "go to today");
    EXPECT_EQ(clean_node("mailto-ish ftp://files.test/x.zip done"), "mailto-ish done");
    EXPECT_EQ(clean_node("##tag ((x)) $$5 %% [[a]] << >> // \t\t"), "#tag (x) $5 % [a] < > /");
    EXPECT_EQ(clean_node("keep ... --- ***"), "keep ... --- ***");
    EXPECT_EQ(clean_node("x_http://y inside"), "x_http:/y inside") << "scheme must start at a word boundary";
}

TEST(Clean, Idempotent) {
    for (const char* s : {"a!!b", "x https://y.z/ w", "##  ##", "wow!!!???", "www.a.b", "(( ))"}) {
        EXPECT_EQ(clean_node(clean_node(s)), clean_node(s)) << s;
    }
}

TEST(PostCleanGate, Boundaries) {
    EXPECT_TRUE(post_clean_gate("abcdefghijk"));
    EXPECT_FALSE(post_clean_gate("abcdefghij"));
    EXPECT_FALSE(post_clean_gate(""));
    EXPECT_TRUE(post_clean_gate("abcdef", 5));
    EXPECT_FALSE(post_clean_gate("abcde", 5));
}

TEST(FilterTextNodes, CountsReasonsAndCleans) {
    Document d = make_doc("http://d.test/", {text("A perfectly normal sentence!!!"), image("http://d.test/i.png"),
                                             text("Newsletter"), text("go https://a.test/x"),
                                             text("abcdefghij"), text("abcdefghijk")});
    StageCounter c(Granularity::text_nodes);
    filter_text_nodes(d, NodeFilterConfig{}, DateMatcher(NodeFilterConfig::default_date_patterns()), &c);
    ASSERT_EQ(d.nodes.size(), 3u);
    EXPECT_EQ(std::get<TextNode>(d.nodes[0]).text, "A perfectly normal sentence!");
    EXPECT_TRUE(is_image(d.nodes[1]));
    EXPECT_EQ(std::get<TextNode>(d.nodes[2]).text, "abcdefghijk");
    EXPECT_EQ(c.in(), 5u);
    const auto r = c.reasons();
    EXPECT_EQ(r.at("banned_exact"), 1u);
    EXPECT_EQ(r.at("post_clean_5_bytes"), 1u);   // "go"
    EXPECT_EQ(r.at("post_clean_10_bytes"), 1u);  // ten bytes
}

TEST(DocFilter, ReferenceExamples) {
    Document nsfw = doc_with(6, 60);
    std::get<TextNode>(nsfw.nodes[3]).text = "watch free porn here";
    EXPECT_EQ(filter_document(nsfw).reason, "nsfw");

    EXPECT_EQ(filter_document(doc_with(4, 100)).reason, "too_small_nodes");
    EXPECT_TRUE(filter_document(doc_with(5, 100)).keep);
    EXPECT_EQ(filter_document(doc_with(6, 49, 5)).reason, "too_small_chars");  // 299
    EXPECT_TRUE(filter_document(doc_with(6, 50)).keep);                        // 300
}

TEST(DocFilter, CharsCountScalarsNotBytes) {
    std::vector<Node> n;
    for (int i = 0; i < 5; ++i) n.emplace_back(text(std::string(59 * 2, '\0')));
    for (auto& node : n) {
        std::string s;
        for (int i = 0; i < 59; ++i) s += "é";
        std::get<TextNode>(node).text = s;
    }
    // 295 scalars, 590 bytes.
    EXPECT_EQ(filter_document(make_doc("http://d.test/", n)).reason, "too_small_chars");
}

TEST(Wordlist, WholeWordCaseInsensitive) {
    WordlistMatcher m({"porn", "sex video", "a.b"});
    EXPECT_TRUE(m.matches("Free PORN today"));
    EXPECT_TRUE(m.matches("porn"));
    EXPECT_TRUE(m.matches("(porn)"));
    EXPECT_TRUE(m.matches("new Sex Video here"));
    EXPECT_FALSE(m.matches("pornography"));
    EXPECT_FALSE(m.matches("sporn"));
    EXPECT_TRUE(m.matches("x a.b y"));
    EXPECT_FALSE(m.matches("x aab y"));
    EXPECT_TRUE(WordlistMatcher().empty());
    EXPECT_FALSE(WordlistMatcher().matches("porn"));
}

TEST(Wordlist, FileFormat) {
    TempDir tmp;
    write_file_atomic(tmp / "w.txt", "# comment\nporn\n\n  nude  # trailing\nxxx\n");
    EXPECT_EQ(load_wordlist(tmp / "w.txt"), (std::vector<std::string>{"porn", "nude", "xxx"}));
    EXPECT_ANY_THROW(load_wordlist(tmp / "missing.txt"));
}
