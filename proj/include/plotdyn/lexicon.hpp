#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "labelset.hpp"
#include "naive_bayes.hpp"

namespace plotdyn {

// Seed vocabulary for the built-in classifier. Each entry is one pseudo
// document per label; corpus weak labels are added on top for genres.

inline const std::vector<std::pair<std::string_view, std::string_view>>& genre_seed_lexicon() {
    static const std::vector<std::pair<std::string_view, std::string_view>> lex = {
        {"Comedy", "funny hilarious joke jokes prank laugh laughs comedy awkward sitcom silly mishap "
                   "chaos antics roommate party embarrassing hijinks comic banter"},
        {"Drama", "family struggle relationship emotional secret confronts grief marriage divorce "
                  "loss guilt past betrayal tension decision conflict mother father son daughter"},
        {"Western", "cowboy sheriff ranch outlaw saloon frontier horse cattle gunslinger desert "
                    "town marshal bandits wagon railroad"},
        {"Adventure", "journey quest expedition treasure island explore map voyage jungle ancient "
                      "discover travel mountain ship lost"},
        {"Animation", "cartoon animated toon animation talking animals magical creatures kids"},
        {"Action", "fight explosion chase gunfight battle mission combat attack rescue escape "
                   "weapons soldiers bomb raid"},
        {"Thriller", "danger conspiracy threat kidnapped hostage stalker deadly suspense trap "
                     "assassin hunted race against time"},
        {"Family", "children kids parents holiday school siblings grandparents home together "
                   "christmas birthday"},
        {"Romance", "love romance date kiss wedding boyfriend girlfriend crush relationship "
                    "heart feelings proposal affair romantic"},
        {"Fantasy", "magic wizard dragon kingdom spell witch curse sorcerer prophecy realm "
                    "enchanted fairy supernatural"},
        {"Horror", "monster ghost demon haunted blood terror scream zombie vampire possessed "
                   "evil nightmare creature killer"},
        {"History", "war empire king queen century historical royal court throne revolution "
                    "ancient era reign victorian"},
        {"Music", "band song songs concert singer music album tour stage performance rehearsal "
                  "guitar record"},
        {"Sci-Fi", "space alien planet spaceship future robot technology galaxy experiment "
                   "scientist time travel laboratory android starship"},
        {"War", "soldiers army battle front enemy troops war general platoon invasion wounded "
                "regiment trenches"},
        {"Crime", "murder detective police investigation suspect killer case crime robbery "
                  "evidence victim arrest gang drug"},
        {"Musical", "sing dance musical number choir broadway chorus song dance routine"},
        {"Biography", "life story true biography career rise famous early years legacy"},
        {"Mystery", "mystery clue disappearance secret puzzle unexplained missing strange "
                    "investigate hidden truth riddle"},
        {"Sport", "team game match coach championship season player tournament win training "
                  "football basketball race"},
    };
    return lex;
}

inline const std::vector<std::pair<std::string_view, std::string_view>>& emoji_seed_lexicon() {
    static const std::vector<std::pair<std::string_view, std::string_view>> lex = {
        {"Love", "love loves loving adore kiss romance heart wedding sweetheart affection darling "
                 "beloved cherish"},
        {"Happy", "happy joy celebrate celebration laugh fun delighted cheerful smile party "
                  "success glad wonderful"},
        {"Wink", "flirt tease scheme sly trick cheeky plan seduce playful mischief bluff"},
        {"Deal", "deal agree agreement support thanks respect approve team help teamwork "
                 "promise cooperate"},
        {"Force", "fight punch strength power strong battle attack gun shoot violence brawl "
                  "weapon muscle"},
        {"Eyes", "shocked surprise surprised reveal revealed discover spy watch embarrassed "
                 "secret stunned"},
        {"Fear", "fear afraid scared terrified danger threat panic dread horror nightmare "
                 "death dead dies skull"},
        {"Mad", "angry anger furious rage argue argument fight hate revenge annoyed resent "
                "confront feud"},
        {"Sad", "sad grief mourn funeral cry tears lonely loss heartbroken depressed tragedy "
                "overdose hospital"},
        {"Music", "music song sing singing band concert dance album melody headphones tune"},
        {"Misc", "meanwhile day work office meeting routine ordinary trip town news sleep"},
    };
    return lex;
}

/// Seed documents for a built-in label set, in label order.
inline std::vector<LabeledText> seed_documents(const LabelSet& set) {
    const auto& lex = set.name() == "emoji11" ? emoji_seed_lexicon() : genre_seed_lexicon();
    std::vector<LabeledText> out;
    for (const auto& [label, text] : lex) {
        if (set.index_of(label)) out.push_back({std::string(text), std::string(label)});
    }
    return out;
}

/// Maps source genre names (TVmaze vocabulary) onto a label in `set`.
inline std::optional<std::string> map_genre(std::string_view genre, const LabelSet& set) {
    if (set.index_of(genre)) return std::string(genre);
    static const std::vector<std::pair<std::string_view, std::string_view>> aliases = {
        {"Science-Fiction", "Sci-Fi"}, {"Science Fiction", "Sci-Fi"}, {"Sports", "Sport"},
        {"Anime", "Animation"},        {"Children", "Family"},        {"Espionage", "Thriller"},
        {"Supernatural", "Fantasy"},   {"Legal", "Crime"},
    };
    for (const auto& [from, to] : aliases) {
        if (genre == from && set.index_of(to)) return std::string(to);
    }
    return std::nullopt;
}

}  // namespace plotdyn
