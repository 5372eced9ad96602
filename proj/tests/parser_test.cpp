#include "bitml/corpus.hpp"
#include "bitml/parser.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <random>

namespace bitml {
namespace {

using test::P;

const char* kTimedCommitment = R"(
(participants A B)
(honest A)
(main
  (pre (deposit A 1 x) (secret A a))
  (choice
    (put (a) (withdraw A))
    (after 10 (withdraw B))))
)";

TEST(Parser, TimedCommitmentAst) {
  const ContractSpec spec = parse_spec_or_throw(kTimedCommitment);
  const Contract expected = choice({gput({"a"}, ptrue(), single(gwithdraw(P("A")))),
                                    gafter(sconst(10), gwithdraw(P("B")))});
  EXPECT_EQ(spec.root.contract, expected);
  ASSERT_EQ(spec.root.pre.size(), 2u);
  EXPECT_EQ(spec.root.pre[0].kind, PreAtom::Kind::Deposit);
  EXPECT_EQ(spec.root.pre[0].value, 1);
  EXPECT_FALSE(spec.root.pre[0].ref.is_var);
  EXPECT_EQ(spec.root.pre[1].secret, "a");
  EXPECT_EQ(spec.honest, std::set<Participant>{P("A")});
}

TEST(Parser, EmptyFile) {
  const ParseResult r = parse_spec("");
  ASSERT_FALSE(r.ok());
  EXPECT_NE(r.errors.front().message.find("expected (participants"), std::string::npos);
}

TEST(Parser, UnknownRecursionVariable) {
  const ParseResult r = parse_spec(R"(
(participants A)
(honest A)
(main (pre (deposit A 1 x)) (rngt X)))");
  ASSERT_FALSE(r.ok());
  bool found = false;
  for (const auto& e : r.errors) found |= e.message.find("unknown recursion variable X") != std::string::npos;
  EXPECT_TRUE(found);
}

TEST(Parser, ErrorsCarryPositions) {
  const ParseResult r = parse_spec("(participants A)\n(honest A)\n(main (pre) (withdraw 3))");
  ASSERT_FALSE(r.ok());
  const auto& e = r.errors.front();
  EXPECT_EQ(e.span.line, 3u);
  EXPECT_LE(e.span.start, e.span.end);
  EXPECT_EQ(e.format().rfind("3:", 0), 0u) << e.format();
}

TEST(Parser, RationalsAndComments) {
  const ContractSpec spec = parse_spec_or_throw(R"(
; comment
(participants A B)  ; trailing
(honest A)
(main (pre (deposit A 3/2 x) (deposit B 0 y))
  (split (1/10 -> (withdraw A)) (9/10 -> (withdraw B)))))");
  EXPECT_EQ(spec.root.pre[0].value, Rational(3, 2));
  const auto& g = spec.root.contract.branches().front();
  ASSERT_EQ(g->kind, GuardedNode::Kind::Split);
  EXPECT_EQ(g->parts[0].weight, Rational(1, 10));
}

TEST(Printer, EmptyChoice) {
  ContractSpec spec = parse_spec_or_throw(kTimedCommitment);
  EXPECT_EQ(print_contract(Contract()), "(choice)");
  spec.root.contract = Contract();
  EXPECT_EQ(print_compact(parse_spec_or_throw(pretty_print(spec))), print_compact(spec));
}

TEST(Printer, CoinFlipDeadlinesPrintAsExpressions) {
  const std::string out = pretty_print(test::corpus_spec("cfg.bitml"));
  EXPECT_NE(out.find("(after (+ (* 3 n) 1)"), std::string::npos) << out;
}

TEST(RoundTrip, CorpusFiles) {
  for (const auto& f : corpus_files(BITML_CORPUS_DIR)) {
    SCOPED_TRACE(f);
    const ContractSpec spec = test::corpus_spec(f);
    const std::string printed = pretty_print(spec);
    const ParseResult again = parse_spec(printed);
    ASSERT_TRUE(again.ok()) << printed;
    EXPECT_EQ(print_compact(*again.spec), print_compact(spec));
    EXPECT_EQ(pretty_print(*again.spec), printed);
  }
}

TEST(Robustness, RandomBytesNeverCrash) {
  std::mt19937_64 rng(2024);
  std::size_t accepted = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string s(rng() % 200, '\0');
    for (auto& c : s) c = static_cast<char>(rng() % 256);
    const ParseResult r = parse_spec(s);
    if (r.ok()) ++accepted;
    else EXPECT_FALSE(r.errors.empty());
  }
  EXPECT_EQ(accepted, 0u);
}

TEST(Robustness, MutatedCorpusNeverCrashes) {
  std::mt19937_64 rng(7);
  const std::string alphabet = "()-> ;/AB0123456789abnxy\n";
  std::vector<std::string> sources;
  for (const auto& f : corpus_files(BITML_CORPUS_DIR)) sources.push_back(pretty_print(test::corpus_spec(f)));
  for (int i = 0; i < 3000; ++i) {
    std::string s = sources[rng() % sources.size()];
    for (int k = 1 + rng() % 4; k > 0 && !s.empty(); --k) {
      const std::size_t pos = rng() % s.size();
      switch (rng() % 3) {
        case 0: s.erase(pos, 1 + rng() % 8); break;
        case 1: s.insert(pos, 1, alphabet[rng() % alphabet.size()]); break;
        default: s[pos] = alphabet[rng() % alphabet.size()];
      }
    }
    const ParseResult r = parse_spec(s);
    if (!r.ok()) EXPECT_FALSE(r.errors.empty());
  }
}

}  // namespace
}  // namespace bitml
