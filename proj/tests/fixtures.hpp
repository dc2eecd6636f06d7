#pragma once

// Shared hand-authored fixtures: small corpora with known structure, the
// medieval-genealogy and song-performer corpora used in the end-to-end
// checks, and the constructed ablation fixtures (dead-end, noisy-candidates,
// scoring-divergence).

#include <string>
#include <vector>

#include "gsw/core.hpp"
#include "gsw/evalkit.hpp"
#include "gsw/extraction.hpp"
#include "gsw/reranker.hpp"

namespace fixtures {

using namespace gsw;

struct WsBuilder {
    Workspace ws;

    WsBuilder(std::string doc_id, std::string title) {
        ws.doc_id = std::move(doc_id);
        ws.title = std::move(title);
        ws.provenance = {"fixture", 1, "2024-01-01T00:00:00Z"};
    }
    WsBuilder& entity(std::string id, std::string surface, std::vector<RoleAnnotation> roles = {}) {
        ws.entities.push_back({std::move(id), std::move(surface), std::move(roles)});
        return *this;
    }
    WsBuilder& verb(std::string id, std::string phrase, std::vector<std::string> participants) {
        ws.verbs.push_back({std::move(id), std::move(phrase), std::move(participants)});
        return *this;
    }
    WsBuilder& qa(std::string id, std::string verb_id, std::string question, std::string answer,
                  std::vector<std::string> entities) {
        QaPair pair;
        pair.id = std::move(id);
        pair.verb_id = std::move(verb_id);
        pair.question = std::move(question);
        pair.answer_text = std::move(answer);
        pair.answer_entity_ids = std::move(entities);
        pair.doc_id = ws.doc_id;
        ws.qa_pairs.push_back(std::move(pair));
        return *this;
    }
    Workspace build() {
        for (auto& pair : ws.qa_pairs) {
            pair.annotations.clear();
            for (const auto& eid : pair.answer_entity_ids)
                if (const EntityNode* e = ws.find_entity(eid))
                    for (const auto& r : e->roles) pair.annotations.push_back(r);
        }
        auto violations = validate_workspace(ws);
        if (!violations.empty())
            throw std::logic_error("fixture workspace '" + ws.doc_id + "' invalid: " + violations.front().code +
                                   " (" + violations.front().subject + ")");
        return ws;
    }
};

inline void add_workspace(Corpus& corpus, Workspace ws, const std::string& text = "") {
    corpus.documents.push_back({ws.doc_id, ws.title, text.empty() ? ws.title + " reference text." : text});
    corpus.workspaces.emplace(ws.doc_id, std::move(ws));
}

// ---------------------------------------------------------------------------
// Lothair II: 9 entities, 6 verb phrases, 12 bidirectional QA pairs.

inline Workspace lothair_workspace() {
    return WsBuilder("lothair-ii", "Lothair II")
        .entity("e1", "Lothair II",
                {{"person", {"deceased", "historical figure"}}, {"ruler", {"king of Lotharingia", "medieval period"}}})
        .entity("e2", "835", {{"date", {"birth year", "medieval period"}}})
        .entity("e3", "Lotharingia", {{"location", {"kingdom", "medieval period"}}})
        .entity("e4", "855", {{"date", {"start of reign", "medieval period"}}})
        .entity("e5", "Emperor Lothair I",
                {{"person", {"historical figure"}}, {"ruler", {"Carolingian Emperor", "medieval period"}}})
        .entity("e6", "Ermengarde of Tours", {{"person", {"historical figure"}}, {"nobility", {"medieval period"}}})
        .entity("e7", "Teutberga", {{"person", {"deceased", "historical figure"}}, {"nobility", {"medieval period"}}})
        .entity("e8", "875", {{"date", {"death year", "medieval period"}}})
        .entity("e9", "Boso the Elder", {{"person", {"historical figure"}}, {"nobility", {"medieval period"}}})
        .verb("v1", "king of", {"e1", "e3"})
        .verb("v2", "reigned from", {"e1", "e4"})
        .verb("v3", "son of", {"e1", "e5"})
        .verb("v4", "son of", {"e1", "e6"})
        .verb("v5", "married to", {"e1", "e7"})
        .verb("v6", "daughter of", {"e7", "e9"})
        .qa("q01", "v1", "Who was the king of Lotharingia?", "Lothair II", {"e1"})
        .qa("q02", "v1", "What was Lothair II the king of?", "Lotharingia", {"e3"})
        .qa("q03", "v2", "When did Lothair II start his reign?", "855", {"e4"})
        .qa("q04", "v2", "Who started reigning in 855?", "Lothair II", {"e1"})
        .qa("q05", "v3", "Who is the son of Emperor Lothair I?", "Lothair II", {"e1"})
        .qa("q06", "v3", "Who is Lothair II the son of?", "Emperor Lothair I", {"e5"})
        .qa("q07", "v4", "Who is the son of Ermengarde of Tours?", "Lothair II", {"e1"})
        .qa("q08", "v4", "Who was the mother of Lothair II?", "Ermengarde of Tours", {"e6"})
        .qa("q09", "v5", "Who was Lothair II married to?", "Teutberga", {"e7"})
        .qa("q10", "v5", "Who was married to Teutberga?", "Lothair II", {"e1"})
        .qa("q11", "v6", "Who is the daughter of Boso the Elder?", "Teutberga", {"e7"})
        .qa("q12", "v6", "Who is Teutberga the daughter of?", "Boso the Elder", {"e9"})
        .build();
}

inline std::string lothair_text() {
    return "Lothair II was king of Lotharingia from 855 until his death. He was the second son of Emperor "
           "Lothair I and Ermengarde of Tours. His wife Teutberga, who died in 875, was a daughter of Boso "
           "the Elder.";
}

inline Workspace obama_workspace() {
    return WsBuilder("obama", "Barack Obama")
        .entity("e1", "Barack Obama", {{"person", {"44th President"}}})
        .entity("e2", "August 4, 1961", {{"date", {"birth date"}}})
        .entity("e3", "Honolulu, Hawaii", {{"location", {"birthplace"}}})
        .verb("v1", "was born", {"e1", "e2", "e3"})
        .qa("q1", "v1", "When was Barack Obama born?", "August 4, 1961", {"e2"})
        .qa("q2", "v1", "Where was Barack Obama born?", "Honolulu, Hawaii", {"e3"})
        .qa("q3", "v1", "Who was born on August 4, 1961?", "Barack Obama", {"e1"})
        .qa("q4", "v1", "Who was born in Honolulu, Hawaii?", "Barack Obama", {"e1"})
        .build();
}

inline std::string obama_text() {
    return "Barack Obama, the 44th President of the United States, was born on August 4, 1961 in Honolulu, "
           "Hawaii.";
}

// ---------------------------------------------------------------------------
// Genealogy corpus for the two-chain worked example: the right chain goes
// mother -> death date, the distractor chain follows the similarly named
// mother of the father.

struct GenealogyFixture {
    Corpus corpus;
    std::string query = "When did Lothair II's mother die?";
    // scripted reranker with the worked-example hop scores
    std::shared_ptr<ScriptedReranker> reranker = std::make_shared<ScriptedReranker>(0.05);
};

inline GenealogyFixture genealogy_fixture() {
    GenealogyFixture f;
    add_workspace(f.corpus, lothair_workspace(), lothair_text());
    add_workspace(f.corpus,
                  WsBuilder("ermengarde-tours", "Ermengarde of Tours")
                      .entity("e1", "Ermengarde of Tours",
                              {{"person", {"historical figure"}}, {"nobility", {"medieval period"}}})
                      .entity("e2", "20 March 851", {{"date", {"death date"}}})
                      .verb("v1", "died on", {"e1", "e2"})
                      .qa("q1", "v1", "When did Ermengarde of Tours die?", "20 March 851", {"e2"})
                      .qa("q2", "v1", "Who died on 20 March 851?", "Ermengarde of Tours", {"e1"})
                      .build(),
                  "Ermengarde of Tours died on 20 March 851.");
    add_workspace(f.corpus,
                  WsBuilder("ermengarde-hesbaye", "Ermengarde of Hesbaye")
                      .entity("e1", "Ermengarde of Hesbaye",
                              {{"person", {"historical figure"}}, {"nobility", {"medieval period"}}})
                      .entity("e2", "Angers", {{"location", {"city"}}})
                      .entity("e3", "Lothair I", {{"person", {"historical figure"}}})
                      .verb("v1", "died in", {"e1", "e2"})
                      .verb("v2", "mother of", {"e1", "e3"})
                      .qa("q1", "v1", "Where did Ermengarde of Hesbaye die?", "Angers", {"e2"})
                      .qa("q2", "v2", "Who was the mother of Lothair I?", "Ermengarde of Hesbaye", {"e1"})
                      .build(),
                  "Ermengarde of Hesbaye, mother of Lothair I, died in Angers.");

    // hop 1: mother of Lothair II -> Tours 0.92, Hesbaye (mother of the
    // father) 0.78; hop 2: death-date pair 0.94 / death-place pair 0.93
    f.reranker->add_rule("Who was the mother of Lothair II?", "Q: Who was the mother of Lothair II?", 0.92);
    f.reranker->add_rule("Who was the mother of Lothair II?", "Q: Who was the mother of Lothair I?", 0.78);
    f.reranker->add_rule("When did Ermengarde of Tours die?", "Q: When did Ermengarde of Tours die?", 0.94);
    f.reranker->add_rule("When did Ermengarde of Hesbaye die?", "Q: Where did Ermengarde of Hesbaye die?", 0.93);
    return f;
}

inline std::string genealogy_plan_text() {
    return "SEQUENCE\n"
           "Q1 | Who was the mother of Lothair II? | seed: Lothair II\n"
           "Q2 | When did <ENTITY_Q1> die? | ref: Q1\n";
}

// ---------------------------------------------------------------------------
// Song-performer corpus for the two-hop trace check.

struct SongFixture {
    Corpus corpus;
    std::string query = "What is the place of birth of the performer of song Changed It?";
    std::shared_ptr<ScriptedReranker> reranker = std::make_shared<ScriptedReranker>(0.05);
};

inline SongFixture song_fixture() {
    SongFixture f;
    add_workspace(
        f.corpus,
        WsBuilder("changed-it", "Changed It")
            .entity("e1", "Changed It", {{"song", {"single", "2017"}}})
            .entity("e2", "Nicki Minaj", {{"person", {"Trinidadian-American", "rapper", "singer"}}})
            .entity("e3", "Lil Wayne", {{"person", {"American", "rapper"}}})
            .entity("e4", "March 10, 2017", {{"date", {"release date"}}})
            .entity("e5", "No Frauds", {{"song", {"single", "2017"}}})
            .entity("e6", "Regret in Your Tears", {{"song", {"single", "2017"}}})
            .entity("e7", "Motiv", {{"person", {"producer"}}})
            .entity("e8", "Young Money Entertainment", {{"organization", {"record label"}}})
            .verb("v1", "performed", {"e2", "e3", "e1"})
            .verb("v2", "produced", {"e7", "e1"})
            .verb("v3", "released", {"e8", "e1", "e4"})
            .verb("v4", "released alongside", {"e1", "e5", "e6"})
            .qa("p1", "v1", "Who performed \"Changed It\"?", "Nicki Minaj, Lil Wayne", {"e2", "e3"})
            .qa("p2", "v1", "What song did Nicki Minaj and Lil Wayne perform?", "Changed It", {"e1"})
            .qa("p3", "v2", "What song did Motiv, Detail, and Sidney Swift produce?", "Changed It", {"e1"})
            .qa("p4", "v3", "What song did Young Money Entertainment, Cash Money Records, Republic Records release?",
                "Changed It", {"e1"})
            .qa("p5", "v3", "What song was released on March 10, 2017?", "Changed It", {"e1"})
            .qa("p6", "v3", "When was \"Changed It\" released?", "March 10, 2017", {"e4"})
            .qa("p7", "v4", "What other song did Nicki Minaj release on March 10, 2017?", "No Frauds", {"e5"})
            .qa("p8", "v4", "Which ballad did Nicki Minaj release on March 10, 2017?", "Regret in Your Tears",
                {"e6"})
            .build(),
        "Changed It is a song by Nicki Minaj and Lil Wayne, released on March 10, 2017 alongside No Frauds and "
        "Regret in Your Tears.");
    add_workspace(f.corpus,
                  WsBuilder("nicki-minaj", "Nicki Minaj")
                      .entity("e1", "Nicki Minaj", {{"person", {"stage name", "musician", "actress", "model"}}})
                      .entity("e2", "Saint James, Port of Spain", {{"location", {"birthplace", "Trinidad and Tobago"}}})
                      .entity("e3", "Queens, New York City", {{"location", {"raised in", "USA"}}})
                      .entity("e4", "Onika Tanya Maraj-Petty", {{"person", {"birth name"}}})
                      .verb("v1", "was born in", {"e1", "e2"})
                      .verb("v2", "was raised in", {"e1", "e3"})
                      .verb("v3", "is named", {"e1", "e4"})
                      .qa("n1", "v1", "Where was Nicki Minaj born?", "Saint James, Port of Spain", {"e2"})
                      .qa("n2", "v1", "Who was born in Saint James, Port of Spain?", "Nicki Minaj", {"e1"})
                      .qa("n3", "v2", "Who was raised in Queens, New York City?", "Nicki Minaj", {"e1"})
                      .qa("n4", "v2", "Where was Nicki Minaj raised?", "Queens, New York City", {"e3"})
                      .qa("n5", "v3", "What is Nicki Minaj's birth name?", "Onika Tanya Maraj-Petty", {"e4"})
                      .build(),
                  "Nicki Minaj was born in Saint James, Port of Spain and raised in Queens, New York City.");

    const std::string hop1 = "Who performed the song Changed It?";
    f.reranker->add_rule(hop1, "Q: Who performed \"Changed It\"?", 0.8320);
    f.reranker->add_rule(hop1, "Q: What song did Nicki Minaj and Lil Wayne perform?", 0.7852);
    f.reranker->add_rule(hop1, "Q: What song did Motiv", 0.6953);
    f.reranker->add_rule(hop1, "Q: What song did Young Money", 0.6875);
    f.reranker->add_rule(hop1, "Q: What song was released on March 10, 2017?", 0.6172);
    f.reranker->add_rule(hop1, "Q: What other song did Nicki Minaj release", 0.6172);
    f.reranker->add_rule(hop1, "Q: Which ballad did Nicki Minaj release", 0.6172);
    f.reranker->add_rule(hop1, "Q: When was \"Changed It\" released?", 0.5898);

    const std::string hop2 = "What is the place of birth of Nicki Minaj, Lil Wayne?";
    f.reranker->add_rule(hop2, "Q: Where was Nicki Minaj born?", 0.8945);
    f.reranker->add_rule(hop2, "Q: Who was born in Saint James, Port of Spain?", 0.7891);
    f.reranker->add_rule(hop2, "Q: Who was raised in Queens, New York City?", 0.6836);
    f.reranker->add_rule(hop2, "Q: Where was Nicki Minaj raised?", 0.6289);
    f.reranker->add_rule(hop2, "Q: Who performed \"Changed It\"?", 0.5898);
    f.reranker->add_rule(hop2, "Q: What is Nicki Minaj's birth name?", 0.5430);

    f.reranker->add_rule("What is the place of birth of Changed It?",
                         "Q: What song did Nicki Minaj and Lil Wayne perform?", 0.30);
    return f;
}

inline std::string song_plan_text() {
    return "SEQUENCE\n"
           "Q1 | Who performed the song Changed It? | seed: Changed It\n"
           "Q2 | What is the place of birth of <ENTITY_Q1>? | ref: Q1\n";
}

// ---------------------------------------------------------------------------
// Dead-end fixture: the top hop-1 candidate has no useful continuation, so a
// single beam commits to it and fails; a wider beam keeps the weaker correct
// branch alive.

struct DeadEndFixture {
    Corpus corpus;
    std::string query = "What prize did the creator of Widget X receive?";
    std::string gold = "Golden Gear Prize";
    std::shared_ptr<ScriptedReranker> reranker = std::make_shared<ScriptedReranker>(0.02);
};

inline DeadEndFixture dead_end_fixture() {
    DeadEndFixture f;
    add_workspace(f.corpus,
                  WsBuilder("widget-x", "Widget X")
                      .entity("e1", "Widget X", {{"product", {"gadget"}}})
                      .entity("e2", "Decoy Corp", {{"organization", {"manufacturer"}}})
                      .entity("e3", "Ada Smith", {{"person", {"engineer"}}})
                      .verb("v1", "manufactured by", {"e1", "e2"})
                      .verb("v2", "designed by", {"e1", "e3"})
                      .qa("a1", "v1", "Who created Widget X?", "Decoy Corp", {"e2"})
                      .qa("a2", "v2", "Which engineer designed Widget X?", "Ada Smith", {"e3"})
                      .build(),
                  "Widget X was manufactured by Decoy Corp and designed by Ada Smith.");
    add_workspace(f.corpus,
                  WsBuilder("ada-smith", "Ada Smith")
                      .entity("e1", "Ada Smith", {{"person", {"engineer"}}})
                      .entity("e2", "Golden Gear Prize", {{"award", {"engineering"}}})
                      .verb("v1", "received", {"e1", "e2"})
                      .qa("b1", "v1", "What prize did Ada Smith receive?", "Golden Gear Prize", {"e2"})
                      .build(),
                  "Ada Smith received the Golden Gear Prize.");

    const std::string hop1 = "Who created Widget X?";
    f.reranker->add_rule(hop1, "A: Decoy Corp", 0.9);
    f.reranker->add_rule(hop1, "A: Ada Smith", 0.7);
    const std::string dead = "What prize did Decoy Corp receive?";
    f.reranker->add_rule(dead, "Q: Who created Widget X?", 0.06);
    f.reranker->add_rule(dead, "Q: Which engineer designed Widget X?", 0.05);
    f.reranker->add_rule(dead, "Q: What prize did Ada Smith receive?", 0.04);
    f.reranker->add_rule("What prize did Ada Smith receive?", "Q: What prize did Ada Smith receive?", 0.9);
    return f;
}

inline std::string dead_end_plan_text() {
    return "SEQUENCE\n"
           "Q1 | Who created Widget X? | seed: Widget X\n"
           "Q2 | What prize did <ENTITY_Q1> receive? | ref: Q1\n";
}

// ---------------------------------------------------------------------------
// Noisy-candidates fixture: dense retrieval ranks a token-stuffed junk pair
// first; the reranker restores the correct order.

struct NoisyFixture {
    Corpus corpus;
    std::string query = "What award did Alice Moreau receive?";
    std::string gold = "Civic Honor Medal";
    std::shared_ptr<ScriptedReranker> reranker = std::make_shared<ScriptedReranker>(0.02);
};

inline NoisyFixture noisy_fixture() {
    NoisyFixture f;
    add_workspace(f.corpus,
                  WsBuilder("alice-moreau", "Alice Moreau")
                      .entity("e1", "Alice Moreau", {{"person", {"architect"}}})
                      .entity("e2", "Civic Honor Medal", {{"award", {"civic"}}})
                      .verb("v1", "received", {"e1", "e2"})
                      .qa("c1", "v1", "What award did Alice Moreau receive?", "Civic Honor Medal", {"e2"})
                      .build(),
                  "Alice Moreau received the Civic Honor Medal.");
    add_workspace(f.corpus,
                  WsBuilder("junk-feed", "Bulletin Scraps")
                      .entity("e1", "Bulletin", {{"misc", {"scrap"}}})
                      .verb("v1", "mentions", {"e1"})
                      // the stuffed answer makes this row the top dense hit
                      .qa("x1", "v1", "zz yy qq",
                          "award Alice Moreau receive award Alice Moreau receive award Alice Moreau receive what did",
                          {})
                      .build(),
                  "Assorted bulletin scraps.");

    f.reranker->add_rule(f.query, "Q: What award did Alice Moreau receive?", 0.9);
    f.reranker->add_rule(f.query, "Q: zz yy qq", 0.1);
    return f;
}

// ---------------------------------------------------------------------------
// Scoring-divergence fixture: three two-hop-style queries where greedy
// last-hop ranking falls into a strong-final-hop trap and similarity ranking
// falls into a lexical-echo trap; cumulative scoring resolves all three.

struct DivergenceFixture {
    Corpus corpus;
    std::vector<QuestionRecord> dataset;
    std::shared_ptr<ScriptedReranker> reranker = std::make_shared<ScriptedReranker>(0.02);
    // query -> decomposition fixture text
    std::map<std::string, std::string> plans;
};

inline DivergenceFixture divergence_fixture() {
    DivergenceFixture f;

    add_workspace(f.corpus,
                  WsBuilder("marta-silva", "Marta Silva")
                      .entity("e1", "Marta Silva", {{"person", {"painter"}}})
                      .entity("e2", "Porto", {{"location", {"city"}}})
                      .verb("v1", "born in", {"e1", "e2"})
                      .qa("m1", "v1", "Where was Marta Silva born?", "Porto", {"e2"})
                      .build(),
                  "Marta Silva was born in Porto.");

    add_workspace(f.corpus,
                  WsBuilder("karl-weber", "Karl Weber")
                      .entity("e1", "Karl Weber", {{"person", {"composer"}}})
                      .entity("e2", "Greta Weber", {{"person", {"mother"}}})
                      .entity("e3", "Ida Weber", {{"person", {"guardian"}}})
                      .verb("v1", "mother of", {"e2", "e1"})
                      .verb("v2", "brought up", {"e3", "e1"})
                      .qa("k1", "v1", "Who was the mother of Karl Weber?", "Greta Weber", {"e2"})
                      .qa("k2", "v2", "Who brought up young Karl?", "Ida Weber", {"e3"})
                      .build(),
                  "Karl Weber was the son of Greta Weber and was brought up by Ida Weber.");
    add_workspace(f.corpus,
                  WsBuilder("greta-weber", "Greta Weber")
                      .entity("e1", "Greta Weber", {{"person", {"mother"}}})
                      .entity("e2", "4 May 1901", {{"date", {"death date"}}})
                      .verb("v1", "died on", {"e1", "e2"})
                      .qa("g1", "v1", "When did Greta Weber die?", "4 May 1901", {"e2"})
                      .build(),
                  "Greta Weber died on 4 May 1901.");
    add_workspace(f.corpus,
                  WsBuilder("ida-weber", "Ida Weber")
                      .entity("e1", "Ida Weber", {{"person", {"guardian"}}})
                      .entity("e2", "12 June 1917", {{"date", {"death date"}}})
                      .verb("v1", "died on", {"e1", "e2"})
                      .qa("i1", "v1", "When did Ida Weber die?", "12 June 1917", {"e2"})
                      .build(),
                  "Ida Weber died on 12 June 1917.");

    add_workspace(f.corpus,
                  WsBuilder("bo-li", "Bo Li")
                      .entity("e1", "Bo Li", {{"person", {"poet"}}})
                      .entity("e2", "Kestrelia", {{"location", {"country"}}})
                      .entity("e3", "Drossvale", {{"location", {"region"}}})
                      .verb("v1", "homeland of", {"e2", "e1"})
                      .verb("v2", "folklore region of", {"e3", "e1"})
                      .qa("b1", "v1", "Which country is the homeland of Bo Li?", "Kestrelia", {"e2"})
                      .qa("b2", "v2", "What region does folklore call the homeland of Bo Li?",
                          "Drossvale, the homeland of Bo Li", {"e3"})
                      .build(),
                  "Bo Li's homeland is Kestrelia, though folklore links him to Drossvale.");
    add_workspace(f.corpus,
                  WsBuilder("kestrelia", "Kestrelia")
                      .entity("e1", "Kestrelia", {{"location", {"country"}}})
                      .entity("e2", "Vel City", {{"location", {"capital"}}})
                      .verb("v1", "capital of", {"e2", "e1"})
                      .qa("s1", "v1", "What is the capital of Kestrelia?", "Vel City", {"e2"})
                      .build(),
                  "Vel City is the capital of Kestrelia.");
    add_workspace(f.corpus,
                  WsBuilder("drossvale", "Drossvale")
                      .entity("e1", "Drossvale", {{"location", {"region"}}})
                      .entity("e2", "Gran Plaza", {{"location", {"capital"}}})
                      .verb("v1", "capital of", {"e2", "e1"})
                      .qa("d1", "v1", "What is the capital of Drossvale?", "Gran Plaza", {"e2"})
                      .build(),
                  "Gran Plaza is the capital of Drossvale.");

    f.dataset.push_back({"dv1", "Where was Marta Silva born?", {"Porto"}, true});
    f.dataset.push_back({"dv2", "When did the mother of Karl Weber die?", {"4 May 1901"}, true});
    f.dataset.push_back({"dv3", "What is the capital of the homeland of Bo Li?", {"Vel City"}, true});

    f.plans["Where was Marta Silva born?"] =
        "SEQUENCE\nQ1 | Where was Marta Silva born? | seed: Marta Silva\n";
    f.plans["When did the mother of Karl Weber die?"] =
        "SEQUENCE\n"
        "Q1 | Who was the mother of Karl Weber? | seed: Karl Weber\n"
        "Q2 | When did <ENTITY_Q1> die? | ref: Q1\n";
    f.plans["What is the capital of the homeland of Bo Li?"] =
        "SEQUENCE\n"
        "Q1 | What is the homeland of Bo Li? | seed: Bo Li\n"
        "Q2 | What is the capital of <ENTITY_Q1>? | ref: Q1\n";

    f.reranker->add_rule("Where was Marta Silva born?", "Q: Where was Marta Silva born?", 0.95);

    // greedy trap: the guardian branch has the weaker first hop but the
    // stronger final hop
    f.reranker->add_rule("Who was the mother of Karl Weber?", "A: Greta Weber", 0.9);
    f.reranker->add_rule("Who was the mother of Karl Weber?", "A: Ida Weber", 0.5);
    f.reranker->add_rule("When did Greta Weber die?", "Q: When did Greta Weber die?", 0.8);
    f.reranker->add_rule("When did Ida Weber die?", "Q: When did Ida Weber die?", 0.95);

    // similarity trap: the folklore branch echoes the query wording
    f.reranker->add_rule("What is the homeland of Bo Li?", "A: Kestrelia", 0.85);
    f.reranker->add_rule("What is the homeland of Bo Li?", "A: Drossvale", 0.55);
    f.reranker->add_rule("What is the capital of Kestrelia?", "Q: What is the capital of Kestrelia?", 0.8);
    f.reranker->add_rule("What is the capital of Drossvale, the homeland of Bo Li?", "Q: What is the capital of Drossvale?",
                         0.7);
    return f;
}

// ---------------------------------------------------------------------------
// 20-question answerable/unanswerable fixture with scripted predictions and
// hand-computed expectations (see test for the arithmetic).

struct PlatinumFixture {
    std::vector<QuestionRecord> dataset;
    std::map<std::string, std::string> scripted_answers;  // query_id -> model output
    double expected_ans_f1 = 8.0 / 12.0;
    double expected_unans_accuracy = 5.0 / 8.0;
    double expected_mean_em = 6.0 / 20.0;
};

inline PlatinumFixture platinum_fixture() {
    PlatinumFixture f;
    auto add = [&](const std::string& id, const std::string& question, std::vector<std::string> golds,
                   bool answerable, const std::string& scripted) {
        f.dataset.push_back({id, question, std::move(golds), answerable});
        f.scripted_answers[id] = scripted;
    };
    add("p01", "What is the capital of France?", {"Paris"}, true, "Paris");
    add("p02", "Who was the 44th US president?", {"Barack Obama"}, true, "Obama");
    add("p03", "What is the largest animal?", {"blue whale"}, true, "the blue whale");
    add("p04", "When was the moon landing?", {"1969"}, true, "1970");
    add("p05", "What is the tallest mountain?", {"Mount Everest"}, true, "Everest");
    add("p06", "Who wrote Pride and Prejudice?", {"Jane Austen"}, true, "Jane Austen.");
    add("p07", "What gas dominates Earth's atmosphere?", {"nitrogen"}, true, "N/A");
    add("p08", "What is six times seven?", {"42"}, true, "42");
    add("p09", "What is the largest ocean?", {"Pacific Ocean", "the Pacific"}, true, "Pacific");
    add("p10", "What animal is Turo the mascot of?", {"red panda"}, true, "panda");
    add("p11", "What is the longest river?", {"Amazon River"}, true, "Nile");
    add("p12", "What is the lightest element?", {"hydrogen"}, true, "Hydrogen");
    add("p13", "Who audited the ledger of House Veyra?", {}, false, "N/A");
    add("p14", "What did the third letter demand?", {}, false, "n/a");
    add("p15", "Where was the missing shipment stored?", {}, false, "N/A.");
    add("p16", "Who forged the Seal of Brants?", {}, false, "Unknown");
    add("p17", "When did the tribunal reconvene?", {}, false, "N/A");
    add("p18", "Which province revolted first?", {}, false, "probably France");
    add("p19", "Who paid the ransom?", {}, false, "N/A");
    add("p20", "What was the password?", {}, false, "N/A");
    return f;
}

}  // namespace fixtures
