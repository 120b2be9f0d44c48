"""Generate the sample corpus used by the experiment harness.

Parliamentary-debate style sentences from a small probabilistic grammar,
lower-case, whitespace separated, one sentence per line, 4 to 30 words.
"""
import random

rng = random.Random(20240611)

SUBJ = [
    "the commission", "the council", "this parliament", "the committee", "the presidency",
    "the member states", "our group", "the rapporteur", "the european union", "the government",
    "the minister", "the commissioner", "many citizens", "the citizens of europe", "the agency",
    "the court of auditors", "the socialist group", "the liberal group", "my colleagues",
    "the honourable member", "the regions", "national parliaments", "small businesses",
]
VERB_T = [
    "supports", "rejects", "welcomes", "proposes", "adopts", "examines", "considers", "demands",
    "presents", "defends", "criticises", "recognises", "approves", "discusses", "improves",
    "strengthens", "requires", "protects", "reviews", "finances",
]
VERB_I = ["agrees", "disagrees", "must act", "has failed", "will respond", "is ready", "has acted"]
OBJ = [
    "the proposal", "the report", "the directive", "the regulation", "this amendment",
    "the budget", "the strategy", "the agreement", "the resolution", "the framework programme",
    "the common position", "the action plan", "the new rules", "the internal market",
    "the fisheries policy", "the agricultural policy", "the environmental standards",
    "the rights of workers", "the protection of consumers", "the funding for research",
    "the enlargement process", "the stability pact", "the single currency", "the treaty",
    "the safety of food", "the transport network", "the energy supply", "the asylum system",
]
ADJ = ["important", "necessary", "urgent", "difficult", "clear", "essential", "unacceptable",
       "reasonable", "ambitious", "balanced", "serious", "fundamental"]
NOUN = ["question", "issue", "problem", "step", "debate", "decision", "priority", "challenge",
        "compromise", "principle", "objective", "vote"]
TOPIC = ["employment", "the environment", "human rights", "public health", "climate change",
         "transparency", "competition", "social cohesion", "energy security", "democracy",
         "education", "the fight against fraud", "sustainable development", "fundamental rights"]
TIME = ["today", "next year", "this week", "in the long term", "as soon as possible",
        "before the summer", "at the next summit", "in the coming months", "without delay"]
OPEN = ["mr president", "madam president", "ladies and gentlemen", "commissioner",
        "mr president ladies and gentlemen"]
FRAME = ["i believe that", "we know that", "it is clear that", "i think that",
         "we must recognise that", "i am convinced that", "let me say that",
         "i would like to stress that", "it is true that", "we cannot accept that"]
PP = ["in this area", "in the member states", "at european level", "for our citizens",
      "in the internal market", "in the regions", "for future generations", "in this respect",
      "in the third countries", "within the union"]
CONJ = ["and", "but", "because", "while", "although"]


def pick(xs):
    return rng.choice(xs)


def clause():
    r = rng.random()
    if r < 0.45:
        s = f"{pick(SUBJ)} {pick(VERB_T)} {pick(OBJ)}"
    elif r < 0.6:
        s = f"{pick(SUBJ)} {pick(VERB_I)}"
    elif r < 0.8:
        s = f"this is a {pick(ADJ)} {pick(NOUN)} for {pick(TOPIC)}"
    else:
        s = f"{pick(OBJ)} is {pick(ADJ)} for {pick(TOPIC)}"
    if rng.random() < 0.35:
        s += " " + pick(PP)
    if rng.random() < 0.25:
        s += " " + pick(TIME)
    return s


def sentence():
    parts = []
    if rng.random() < 0.3:
        parts.append(pick(OPEN))
    if rng.random() < 0.4:
        parts.append(pick(FRAME))
    parts.append(clause())
    while rng.random() < 0.3:
        parts.append(pick(CONJ))
        parts.append(clause())
    return " ".join(parts)


def main():
    out = []
    seen = set()
    while len(out) < 2000:
        s = sentence()
        n = len(s.split())
        if 4 <= n <= 30 and s not in seen:
            seen.add(s)
            out.append(s)
    with open("crates/harness/data/corpus.txt", "w") as f:
        f.write("\n".join(out) + "\n")


if __name__ == "__main__":
    main()
