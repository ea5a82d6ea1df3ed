#include <gtest/gtest.h>

#include <vector>

#include "test_support.hpp"

using namespace fairpool;
using fairpool::testing::alice;
using fairpool::testing::bob;
using fairpool::testing::BinaryScm;
using fairpool::testing::data_path;
using fairpool::testing::make_diagram;

namespace {

std::size_t copy0(const std::vector<std::size_t>& v) { return v[0]; }
std::size_t and2(const std::vector<std::size_t>& v) { return v[0] & v[1]; }

FairnessPartition partition(const ScmModel& m, const std::string& predictor, VertexSet protected_attrs) {
    return FairnessPartition::over(m.diagram().endogenous(), predictor, std::move(protected_attrs));
}

FairnessPartition applicants(const CausalDiagram& d) { return FairnessPartition::over(d.endogenous(), "Yhat", {"Gnd"}); }

}  // namespace

TEST(FairnessPartition, DerivesFeatures) {
    auto p = applicants(alice());
    EXPECT_EQ(p.features, (VertexSet{"Age", "Cvr", "Dpt", "Job", "Mrk"}));
}

TEST(FairnessPartition, RejectsBadRoles) {
    VertexSet vars{"A", "Y"};
    EXPECT_THROW(FairnessPartition::over(vars, "Z", {"A"}), ValidationError);
    EXPECT_THROW(FairnessPartition::over(vars, "Y", {}), ValidationError);
    EXPECT_THROW(FairnessPartition::over(vars, "Y", {"Y"}), ValidationError);
    EXPECT_THROW(FairnessPartition::over(vars, "Y", {"B"}), ValidationError);
}

TEST(BruteForce, ConstantPredictorIsFair) {
    auto m = BinaryScm()
                 .root("U", 0.3)
                 .var("A", {"U"}, copy0)
                 .var("Yhat", {"A"}, [](const std::vector<std::size_t>&) -> std::size_t { return 0; })
                 .build();
    EXPECT_TRUE(check_fair_bruteforce(m, partition(m, "Yhat", {"A"})).fair);
}

TEST(BruteForce, CopyingTheProtectedAttributeIsUnfair) {
    auto m = load_model(data_path("copy_predictor.json")).to_scm();
    auto verdict = check_fair_bruteforce(m, partition(m, "Yhat", {"A"}));
    EXPECT_FALSE(verdict.fair);
    EXPECT_FALSE(verdict.witnesses.empty());
}

TEST(BruteForce, AndOfProtectedAndFeatureHasTwoWitnesses) {
    auto m = BinaryScm()
                 .root("U_A", 0.4)
                 .root("U_X", 0.7)
                 .var("A", {"U_A"}, copy0)
                 .var("X", {"U_X"}, copy0)
                 .var("Yhat", {"A", "X"}, and2)
                 .build();
    auto verdict = check_fair_bruteforce(m, partition(m, "Yhat", {"A"}));
    ASSERT_FALSE(verdict.fair);
    ASSERT_EQ(verdict.witnesses.size(), 2u);

    const auto& first = verdict.witnesses[0];
    EXPECT_EQ(first.observed_protected, (Assignment{{"A", 0}}));
    EXPECT_EQ(first.observed_features, (Assignment{{"X", 1}}));
    EXPECT_EQ(first.counterfactual_protected, (Assignment{{"A", 1}}));
    EXPECT_EQ(first.predictor_value, 0u);
    EXPECT_DOUBLE_EQ(first.factual_probability, 1.0);
    EXPECT_DOUBLE_EQ(first.counterfactual_probability, 0.0);
    EXPECT_EQ(first.context.values, (Assignment{{"U_A", 0}, {"U_X", 1}}));

    const auto& second = verdict.witnesses[1];
    EXPECT_EQ(second.observed_protected, (Assignment{{"A", 1}}));
    EXPECT_EQ(second.observed_features, (Assignment{{"X", 1}}));
    EXPECT_EQ(second.counterfactual_protected, (Assignment{{"A", 0}}));
    EXPECT_EQ(second.predictor_value, 0u);
    EXPECT_DOUBLE_EQ(second.factual_probability, 0.0);
    EXPECT_DOUBLE_EQ(second.counterfactual_probability, 1.0);
}

TEST(BruteForce, ZeroProbabilityEvidenceIsSkipped) {
    // A is almost surely 0, so only a = 0 is ever observed; Yhat copies A.
    auto m = BinaryScm().root("U", 0.0).var("A", {"U"}, copy0).var("Yhat", {"A"}, copy0).build();
    auto verdict = check_fair_bruteforce(m, partition(m, "Yhat", {"A"}));
    ASSERT_EQ(verdict.witnesses.size(), 1u);
    EXPECT_EQ(verdict.witnesses[0].observed_protected, (Assignment{{"A", 0}}));
}

TEST(BruteForce, PartitionMustMatchModel) {
    auto m = BinaryScm().root("U", 0.5).var("A", {"U"}, copy0).var("Yhat", {"A"}, copy0).build();
    FairnessPartition p{"Yhat", {"A"}, {"Ghost"}};
    EXPECT_THROW(check_fair_bruteforce(m, p), ValidationError);
}

TEST(ContextPosterior, NormalizesAndConditions) {
    auto m = BinaryScm()
                 .root("U1", 0.2)
                 .root("U2", 0.5)
                 .var("C", {"U1", "U2"}, [](const std::vector<std::size_t>& v) { return v[0] | v[1]; })
                 .build();
    auto post = context_posterior(m, {{"C", 1}});
    ASSERT_EQ(post.size(), 3u);
    double total = 0.0;
    for (const auto& [_, p] : post) total += p;
    EXPECT_NEAR(total, 1.0, 1e-12);
    // P(C=1) = 1 - 0.8 * 0.5 = 0.6; context (1,1) has prior 0.1
    EXPECT_EQ(post.back().first.values, (Assignment{{"U1", 1}, {"U2", 1}}));
    EXPECT_NEAR(post.back().second, 0.1 / 0.6, 1e-12);

    auto impossible = BinaryScm().root("U", 1.0).var("C", {"U"}, copy0).build();
    EXPECT_TRUE(context_posterior(impossible, {{"C", 0}}).empty());
}

TEST(StructuralCheck, BobReadsJob) {
    auto result = check_fair_structural(bob(), applicants(bob()));
    EXPECT_FALSE(result.fair);
    EXPECT_EQ(result.offenders, (VertexSet{"Job"}));
}

TEST(StructuralCheck, AliceReadsThreeDescendants) {
    auto result = check_fair_structural(alice(), applicants(alice()));
    EXPECT_EQ(result.offenders, (VertexSet{"Dpt", "Job", "Mrk"}));
}

TEST(StructuralCheck, CoverLetterOnlyIsFair) {
    auto d = with_predictor_inputs(alice(), "Yhat", {"Cvr"});
    EXPECT_TRUE(check_fair_structural(d, applicants(d)).fair);
}

TEST(StructuralCheck, ParentlessPredictorIsFair) {
    auto d = make_diagram({"A", "X", "Yhat"}, {{"A", "X"}});
    auto p = FairnessPartition::over(d.endogenous(), "Yhat", {"A"});
    EXPECT_TRUE(check_fair_structural(d, p).fair);
}

TEST(StructuralCheck, RejectsCyclesAndUnknownPredictor) {
    auto cyclic = make_diagram({"A", "B", "Yhat"}, {{"A", "B"}, {"B", "A"}});
    auto p = FairnessPartition::over(cyclic.endogenous(), "Yhat", {"A"});
    EXPECT_THROW(check_fair_structural(cyclic, p), ValidationError);
    auto other = p;
    other.predictor = "Q";
    EXPECT_THROW(check_fair_structural(cyclic, other), ValidationError);
}

// The structural check is sufficient, not necessary: a predictor that reads a
// descendant of A but ignores its value is fair.
TEST(OneSidedness, ConstantPredictorOnTaintedInput) {
    auto doc = load_model(data_path("constant_predictor.json"));
    auto m = doc.to_scm();
    auto p = partition(m, "Yhat", {"A"});
    EXPECT_FALSE(check_fair_structural(m.diagram().endogenous_part(), p).fair);
    EXPECT_TRUE(check_fair_bruteforce(m, p).fair);
}

TEST(Soundness, StructurallyFairModelsPassBruteForce) {
    Rng rng(2024);
    int structurally_fair = 0;
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::string> order{"A", "B", "C", "D"};
        rng.shuffle(order);
        order.push_back("Yhat");
        CausalDiagram d;
        for (const auto& v : order) d.add_vertex(v);
        for (std::size_t a = 0; a < order.size(); ++a)
            for (std::size_t b = a + 1; b < order.size(); ++b)
                if (rng.bernoulli(0.4)) d.add_edge(order[a], order[b]);
        auto p = FairnessPartition::over(d.endogenous(), "Yhat", {"A"});
        if (!check_fair_structural(d, p).fair) continue;
        ++structurally_fair;
        auto m = random_scm(d, rng);
        EXPECT_TRUE(check_fair_bruteforce(m, p).fair) << "trial " << trial;
    }
    EXPECT_GT(structurally_fair, 50);
}
