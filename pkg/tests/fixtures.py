"""Shared deterministic fixtures."""
import random

_WORDS = (
    "the ecg shows sinus rhythm with normal axis and no acute st changes . "
    "atrial fibrillation is present , rate controlled ; left bundle branch block noted . "
    "abnormal t waves in leads v1 to v3 suggest ischemia ? prolonged qt interval beats "
    "showing sinus bradycardia tachycardia premature ventricular contractions"
).split()


def metric_pairs(n=50, seed=7):
    """``n`` (candidate, reference) sentences with partial overlap, some identical."""
    rng = random.Random(seed)
    pairs = []
    for i in range(n):
        ref = [rng.choice(_WORDS) for _ in range(rng.randint(3, 25))]
        if i % 10 == 0:
            cand = list(ref)
        else:
            cand = [w if rng.random() < 0.6 else rng.choice(_WORDS) for w in ref]
            if rng.random() < 0.5:
                cand = cand[: rng.randint(1, len(cand))]
            else:
                cand += [rng.choice(_WORDS) for _ in range(rng.randint(0, 5))]
        pairs.append((" ".join(cand), " ".join(ref)))
    return pairs


# Published mean BLEU per model on one instruction dataset; radar fixture.
REPORTED_BLEU_COLUMN = {
    "sig-MERL": 22.29,
    "sig-ST-MEM": 22.09,
    "sig-MLAE": 23.06,
    "sig-MTAE": 22.21,
    "sigstar-CLIP": 22.35,
    "sigstar-ViT": 21.96,
    "sigstar-SigLIP": 22.85,
    "img-CLIP": 21.98,
    "img-ViT": 21.59,
    "img-SigLIP": 22.59,
    "ECG-Byte": 23.74,
}
