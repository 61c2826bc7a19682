"""Deterministic synthetic survey generator for desk-scale experiments.

Builds a complete survey with the same shape as a real city campaign:
four imbalanced quality-of-life classes, satisfaction codes that carry
class signal in some sectors and none in others, weak participation
signal, per-neighborhood proposal profiles with planted favorites, and a
relocation pattern with one dominant flow.

The signal structure is intentional: the two "null" sectors (public
transport, shopping) are generated independently of the class so a sound
significance test must NOT flag them, while the five "signal" sectors
must be flagged.  Classes 1 and 2 are rare and sit close to their larger
neighbors in feature space, so an unbalanced fit under-serves them and
rebalancing visibly helps.
"""

from __future__ import annotations

import numpy as np

from civicpulse import SurveyDataset, SurveyResponse

from conftest import NEIGHBORHOODS, SECTORS

NULL_SECTORS = ("Public Transport", "Shopping Facilities")

SIGNAL_SECTORS = (
    "Social Meetings",
    "Neighbourly Life",
    "Social Infrastructure",
    "Recreational Areas",
    "Playing Facilities",
)

SUPPORT_SECTORS = tuple(
    s for s in SECTORS if s not in NULL_SECTORS and s not in SIGNAL_SECTORS
)

CLASS_WEIGHTS = (0.055, 0.075, 0.435, 0.435)

QOL_BY_CLASS = {
    1: ("Insufficient", "Bad", "I don't know"),
    2: ("Enough",),
    3: ("Good",),
    4: ("Very Good",),
}

# Class-conditional satisfaction means (classes 1..4).  Signal sectors step
# clearly, support sectors step mildly, null sectors do not step at all.
# The rare classes are tighter: their regions are mostly pure, so their
# classification hinges on coverage rather than on the class prior.
SIGNAL_MEANS = (1.5, 2.35, 3.5, 4.1)
SIGNAL_NOISE = (0.55, 0.55, 0.75, 0.75)
SUPPORT_MEANS = (2.6, 2.95, 3.35, 3.65)
NULL_MEAN = 3.4
CODE_NOISE = 0.7

# Participation: q13/q14 step weakly with class, the rest are noise.
PARTICIPATION_SLOPE = 0.35


def _code(rng, mean, noise, lo=1, hi=5, idk_rate=0.02):
    if idk_rate > 0 and rng.random() < idk_rate:
        return 0
    value = int(round(rng.normal(mean, noise)))
    return int(min(max(value, lo), hi))


def _proposal_profile(neighborhood_index: int) -> np.ndarray:
    """Zipf-like sector preferences, rotated so each neighborhood differs."""
    weights = 1.0 / np.arange(1, len(SECTORS) + 1) ** 1.4
    return np.roll(weights / weights.sum(), neighborhood_index)


def make_synthetic_survey(
    n_rows: int = 1204,
    seed: int = 7,
    relocation_rate: float = 0.14,
    proposal_rate: float = 1.3,
) -> SurveyDataset:
    rng = np.random.default_rng(seed)
    n_hoods = len(NEIGHBORHOODS)
    hood_weights = rng.dirichlet(np.full(n_hoods, 4.0))
    profiles = [_proposal_profile(i) for i in range(n_hoods)]

    # Fixed relocation flow pattern with a clear maximum.
    flow_weights = rng.random((n_hoods, n_hoods))
    np.fill_diagonal(flow_weights, 0.0)
    flow_weights[1, 0] = flow_weights.max() * 3.0

    # Exact class counts (largest remainder), then shuffled: realized
    # marginals match the weights instead of drifting with sampling noise.
    raw = np.asarray(CLASS_WEIGHTS) * n_rows
    class_counts = np.floor(raw).astype(int)
    remainder_order = np.argsort(-(raw - class_counts), kind="stable")
    for j in range(n_rows - class_counts.sum()):
        class_counts[remainder_order[j % 4]] += 1
    class_vector = np.repeat(np.arange(1, 5), class_counts)
    rng.shuffle(class_vector)

    responses = []
    for i in range(n_rows):
        klass = int(class_vector[i])
        qol_options = QOL_BY_CLASS[klass]
        qol = qol_options[int(rng.integers(len(qol_options)))]

        satisfaction = {}
        for sector in SECTORS:
            if sector in SIGNAL_SECTORS:
                mean = SIGNAL_MEANS[klass - 1]
                noise = SIGNAL_NOISE[klass - 1]
            elif sector in SUPPORT_SECTORS:
                mean = SUPPORT_MEANS[klass - 1]
                noise = CODE_NOISE
            else:
                mean = NULL_MEAN
                noise = CODE_NOISE
            satisfaction[sector] = _code(rng, mean, noise)

        base = 1.1 + PARTICIPATION_SLOPE * (klass - 1)
        participation = {
            "q13": _code(rng, base, 1.0, lo=0, hi=4, idk_rate=0.0),
            "q14": _code(rng, base + 0.4, 1.0, lo=0, hi=4, idk_rate=0.0),
            "q15": int(rng.integers(0, 3)),
            "q16": int(rng.integers(0, 3)),
            "q17": int(rng.integers(0, 3)),
            "q18": _code(rng, 0.6 + 0.15 * (klass - 1), 0.7, lo=0, hi=2, idk_rate=0.0),
        }

        hood_index = int(rng.choice(n_hoods, p=hood_weights))
        neighborhood = NEIGHBORHOODS[hood_index]

        previous = None
        if rng.random() < relocation_rate:
            weights = flow_weights[:, hood_index].copy()
            if weights.sum() > 0:
                weights = weights / weights.sum()
                previous = NEIGHBORHOODS[int(rng.choice(n_hoods, p=weights))]
                if previous == neighborhood:
                    previous = None

        n_proposals = int(rng.poisson(proposal_rate))
        proposals = tuple(
            SECTORS[int(rng.choice(len(SECTORS), p=profiles[hood_index]))]
            for _ in range(n_proposals)
        )

        responses.append(
            SurveyResponse(
                respondent_id=f"synth-{i:05d}",
                neighborhood=neighborhood,
                previous_neighborhood=previous,
                qol_raw=qol,
                satisfaction=satisfaction,
                participation=participation,
                household=int(rng.integers(1, 5)),
                education=int(rng.integers(1, 5)),
                employment=int(rng.integers(0, 4)),
                proposals=proposals,
            )
        )

    return SurveyDataset(
        responses=tuple(responses),
        neighborhood_labels=NEIGHBORHOODS,
        sector_labels=SECTORS,
    )
