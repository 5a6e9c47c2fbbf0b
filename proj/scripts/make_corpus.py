#!/usr/bin/env python3
"""Regenerates the bundled sample corpus under data/.

The corpus is synthetic English-like prose drawn from a fixed word-level
Markov chain, so the repository ships no third-party text and the files are
reproducible byte-for-byte. Documents are one per line; eval.txt is a
held-out continuation of the same process, never part of corpus.txt.

Usage: python3 scripts/make_corpus.py [out_dir]
"""

import random
import sys

WORDS = """
the a an and or but so then while when where after before because although
man woman child king queen farmer sailor merchant scholar stranger guard
dog cat horse bird fish wolf bear fox hare crow
house garden river mountain forest village city road bridge harbor tower
field valley island shore meadow orchard mill barn well gate
sun moon star cloud rain snow wind storm fire shadow light morning evening
night winter summer spring autumn day year season harvest
bread water wine salt grain apple honey milk stone iron silver gold wood
rope sail wheel plough lantern candle letter book map coin bell
walked ran rode sailed climbed crossed followed found lost carried brought
took gave sold bought built broke mended opened closed watched heard saw
told asked answered called waited rested slept woke worked played sang
spoke listened remembered forgot promised refused agreed offered tried
began finished returned departed arrived stayed left traveled wandered
old young tall short small great quiet loud bright dark heavy light swift
slow warm cold dry wet green red white black grey golden silver distant
near deep shallow narrow wide empty full rich poor kind cruel wise foolish
tired hungry thirsty happy sad angry calm brave fearful honest careful
careless patient
he she it they we you i his her its their our your my him them us
in on at by with from to of for over under through across along around
behind beyond between among near beside against during until toward
was were is are had has did does came went said made knew thought felt
seemed became stood sat lay kept let met got put set ran held
very quite rather almost always never often sometimes soon late early
again still yet once twice here there everywhere nowhere home away back
forth together alone quietly slowly quickly carefully suddenly finally
""".split()


def build_chain(rng):
    """Fixed sparse successor table; the structure is what the models learn."""
    chain = {}
    for word in WORDS:
        successors = rng.sample(WORDS, 8)
        weights = [rng.randint(1, 9) for _ in successors]
        chain[word] = (successors, weights)
    return chain


def sentence(rng, chain, starters):
    word = rng.choice(starters)
    words = [word]
    for _ in range(rng.randint(5, 13)):
        successors, weights = chain[word]
        word = rng.choices(successors, weights)[0]
        words.append(word)
    return " ".join(words) + "."


def document(rng, chain, starters):
    return " ".join(sentence(rng, chain, starters) for _ in range(rng.randint(4, 7)))


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "data"
    rng = random.Random(20260810)
    chain = build_chain(rng)
    starters = rng.sample(WORDS, 40)

    corpus_docs = [document(rng, chain, starters) for _ in range(300)]
    eval_docs = [document(rng, chain, starters) for _ in range(30)]

    with open(f"{out_dir}/corpus.txt", "w") as f:
        f.write("\n".join(corpus_docs) + "\n")
    with open(f"{out_dir}/eval.txt", "w") as f:
        f.write("\n".join(eval_docs) + "\n")

    corpus_chars = set("".join(corpus_docs))
    eval_chars = set("".join(eval_docs))
    assert eval_chars <= corpus_chars, "eval would contain unseen characters"
    print(f"corpus: {len(corpus_docs)} docs, {sum(len(d) for d in corpus_docs)} chars")
    print(f"eval:   {len(eval_docs)} docs, {sum(len(d) for d in eval_docs)} chars")
    print(f"charset: {len(corpus_chars)} distinct characters")


if __name__ == "__main__":
    main()
