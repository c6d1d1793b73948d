#!/usr/bin/env python3
"""Generate the synthetic imbalanced software-mention corpus under data/fixtures.

Sentences are drawn from templates: roughly 95% carry no mention at all, the
rest mention one or two pieces of software whose type comes from the name and
whose mention type comes from the surrounding context. The test split holds
out part of the software vocabulary so that context features matter.

Deterministic for a given --seed; the committed files were produced with the
defaults.
"""

import argparse
import random
from pathlib import Path

SOFTWARE = {
    "Application": [
        "SPSS", "ImageJ", "VirtualBox", "Cytoscape", "Stata", "FastQC", "Excel",
        "Trimmomatic", "GraphPad Prism", "Galaxy", "MEGA", "PyMOL", "Chimera",
        "ClustalW", "BLAST", "Bowtie", "SAMtools", "Geneious", "EndNote", "QGIS",
    ],
    "PlugIn": [
        "TrackMate", "Bio-Formats", "MorphoLibJ", "StackReg", "Chaste", "ClueGO",
        "CytoHubba", "MCODE", "BoneJ", "TurboReg",
    ],
    "OperatingSystem": [
        "Linux", "Windows", "Mac OS X", "Ubuntu", "CentOS", "Debian", "macOS",
        "Fedora",
    ],
    "ProgrammingEnvironment": [
        "Python", "R", "MATLAB", "Java", "Perl", "Julia", "Octave", "Mathematica",
    ],
    "Package": [
        "ggplot2", "lme4", "NumPy", "SciPy", "scikit-learn", "limma", "DESeq2",
        "Biopython", "pandas", "edgeR", "Seurat", "vegan", "TensorFlow", "PyTorch",
    ],
}

CONTEXTS = {
    "Usage": [
        "Statistical analyses were performed using {0} .",
        "All images were processed in {0} before quantification .",
        "We used {0} to analyse the sequencing reads .",
        "Data were visualised with {0} and checked manually .",
        "The simulations were run on {0} with default parameters .",
        "Reads were aligned with {0} and filtered for quality .",
        "Figures were generated using {0} .",
        "Models were fitted in {0} with the settings described above .",
    ],
    "Mention": [
        "Tools such as {0} have been proposed for similar problems .",
        "{0} is widely used in the community .",
        "Unlike {0} , our approach requires no manual tuning .",
        "Previous studies relied on {0} for this task .",
        "A comparison with {0} is beyond the scope of this work .",
        "Alternatives include {0} and related tools .",
    ],
    "Creation": [
        "We developed {0} , a new tool for this analysis .",
        "Here we present {0} , an open framework for the community .",
        "In this work we introduce {0} to address these limitations .",
        "We implemented {0} as part of this study .",
    ],
}

TWO_MENTION = [
    ("Usage", "Usage", "Analyses were performed in {0} using {1} ."),
    ("Usage", "Usage", "We used {0} together with {1} for preprocessing ."),
    ("Mention", "Mention", "Both {0} and {1} are commonly cited ."),
    ("Creation", "Usage", "We developed {0} , which was implemented in {1} ."),
]

SUBJECTS = [
    "The samples", "These results", "The patients", "Our findings", "The cells",
    "The proteins", "The participants", "The measurements", "The mice", "The data",
    "The analysis", "The model", "The experiment", "The cohort", "The signal",
]
VERBS = [
    "were collected", "were analysed", "showed", "suggest", "were measured",
    "indicate", "were observed", "increased", "decreased", "remained stable",
    "were compared", "were recorded", "confirm", "differ", "were treated",
]
OBJECTS = [
    "a significant increase in expression", "no difference between groups",
    "the expected pattern", "a strong correlation with age", "higher activity",
    "a reduction in mortality", "the effect of temperature", "similar trends",
    "the role of inflammation", "a decline over time", "the same distribution",
    "a marked response to treatment", "lower variability", "two distinct clusters",
]
TAILS = [
    "in all conditions", "after two weeks", "at baseline", "in the control group",
    "as described previously", "across sites", "during the follow-up",
    "for each replicate", "under standard conditions", "in both sexes",
]


def tokens_of(name):
    return name.split()


def mention_tokens(name, label):
    toks = tokens_of(name)
    tags = ["B-" + label] + ["I-" + label] * (len(toks) - 1)
    return list(zip(toks, tags))


def fill(template, mentions):
    out = []
    for word in template.split():
        if word in ("{0}", "{1}"):
            out.extend(mentions[int(word[1])])
        else:
            out.append((word, "O"))
    return out


def background(rng):
    words = [rng.choice(SUBJECTS), rng.choice(VERBS), rng.choice(OBJECTS)]
    if rng.random() < 0.6:
        words.append(rng.choice(TAILS))
    sentence = " ".join(words) + " ."
    return [(w, "O") for w in sentence.split()]


def pick(rng, names_by_type, software_type=None):
    if software_type is None:
        software_type = rng.choice(sorted(names_by_type))
    return software_type, rng.choice(names_by_type[software_type])


def mention_sentence(rng, names_by_type):
    if rng.random() < 0.2:
        m0, m1, template = rng.choice(TWO_MENTION)
        s0, n0 = pick(rng, names_by_type)
        s1, n1 = pick(rng, names_by_type)
        return fill(template, [mention_tokens(n0, f"{s0}_{m0}"), mention_tokens(n1, f"{s1}_{m1}")])
    mention_type = rng.choices(["Usage", "Mention", "Creation"], weights=[6, 3, 1])[0]
    software_type, name = pick(rng, names_by_type)
    template = rng.choice(CONTEXTS[mention_type])
    return fill(template, [mention_tokens(name, f"{software_type}_{mention_type}")])


def corpus(rng, n, mention_rate, names_by_type):
    sentences = []
    for _ in range(n):
        if rng.random() < mention_rate:
            sentences.append(mention_sentence(rng, names_by_type))
        else:
            sentences.append(background(rng))
    return sentences


def write(path, sentences):
    blocks = ["".join(f"{tok}\t{tag}\n" for tok, tag in s) for s in sentences]
    path.write_text("\n".join(blocks), encoding="utf-8")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=Path(__file__).resolve().parent.parent / "data" / "fixtures",
                        type=Path)
    parser.add_argument("--seed", type=int, default=20240501)
    parser.add_argument("--train", type=int, default=2400)
    parser.add_argument("--test", type=int, default=800)
    parser.add_argument("--mention-rate", type=float, default=0.05)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    seen, everything = {}, {}
    for software_type, names in SOFTWARE.items():
        names = list(names)
        rng.shuffle(names)
        cut = max(1, int(len(names) * 0.7))
        seen[software_type] = names[:cut]
        everything[software_type] = names

    args.out.mkdir(parents=True, exist_ok=True)
    write(args.out / "imbalanced.train.conll", corpus(rng, args.train, args.mention_rate, seen))
    write(args.out / "imbalanced.test.conll", corpus(rng, args.test, args.mention_rate * 2, everything))


if __name__ == "__main__":
    main()
