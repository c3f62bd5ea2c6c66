"""End-to-end training/evaluation runs wired from the library pieces.

A run is fully determined by a dataset and a RunConfig.  The single
master seed is split into five independent component seeds (model init,
codebook column draws, reducer projection, protocol split, stream
order) via numpy's SeedSequence with entropy (master, repeat):

    SeedSequence([master, repeat]).generate_state(5, dtype=uint64)

so ``seed=7`` reproduces an entire run bit-for-bit while each component
stays independently reseedable through the library API.  ``repeat``
indexes protocol repetitions that should differ in everything but the
configuration.
"""

import logging
from collections import namedtuple
from dataclasses import dataclass, field, replace

import numpy as np

from .codec import encode
from .data import NORM_MODES, Dataset, SplitSpec, split, stream
from .errors import ConfigError
from .evaluation import evaluate, map_curve_auc
from .hadamard import HadamardCodebook, codeword_order
from .learner import GRADIENT_FACTORS, TargetCodeTable, init_model, train_stream
from .lsh import LshReducer

log = logging.getLogger("hcoh")

Seeds = namedtuple("Seeds", ["model", "codebook", "reducer", "split", "stream"])


def derive_seeds(master: int, repeat: int = 0) -> Seeds:
    """Five independent component seeds from one master seed."""
    state = np.random.SeedSequence([int(master), int(repeat)]).generate_state(
        5, dtype=np.uint64)
    return Seeds(*(int(s) for s in state))


@dataclass
class RunConfig:
    bits: int = 32
    eta: float = 0.2
    batch_size: int = 1
    seed: int = 0
    repeat: int = 0
    milestones: tuple = ()
    norm: str = "unit255"
    max_labels: int = 2
    test_per_class: int = 100
    train_subset: int = 20000
    k_prec: int = 500
    k_map: int = None
    gradient: str = "exact"
    n_threads: int = 1

    def validate(self):
        if self.bits < 1:
            raise ConfigError(f"bits must be >= 1, got {self.bits}")
        if self.seed < 0 or self.repeat < 0:
            raise ConfigError(
                f"seed and repeat must be non-negative, got {self.seed}, "
                f"{self.repeat}")
        if self.eta <= 0:
            raise ConfigError(f"eta must be positive, got {self.eta}")
        if self.batch_size < 1:
            raise ConfigError(f"batch size must be >= 1, got {self.batch_size}")
        ms = list(self.milestones)
        if any(m < 1 for m in ms) or any(a >= b for a, b in zip(ms, ms[1:])):
            raise ConfigError(
                f"milestones must be positive and strictly increasing, got {ms}")
        if self.norm not in NORM_MODES:
            raise ConfigError(f"norm must be one of {NORM_MODES}, got {self.norm!r}")
        if self.gradient not in GRADIENT_FACTORS:
            raise ConfigError(
                f"gradient must be one of {GRADIENT_FACTORS}, got {self.gradient!r}")
        if self.max_labels < 1:
            raise ConfigError(f"max_labels must be >= 1, got {self.max_labels}")
        if self.k_prec < 1:
            raise ConfigError(f"k_prec must be >= 1, got {self.k_prec}")
        if self.k_map is not None and self.k_map < 1:
            raise ConfigError(f"k_map must be >= 1, got {self.k_map}")
        return self


@dataclass
class TrainResult:
    records: list
    summary: dict
    model: object
    book: object
    reducer: object
    seeds: Seeds
    curve: list = field(default_factory=list)


def run_training(dataset: Dataset, config: RunConfig) -> TrainResult:
    """Split, stream, train, and evaluate at milestones and at the end.

    Emits one checkpoint record per milestone crossing (plus a final one
    when the stream ends past the last milestone) and a closing summary
    record carrying the curve AUC.
    """
    config.validate()
    seeds = derive_seeds(config.seed, config.repeat)
    test, retrieval, train = split(
        dataset, SplitSpec(config.test_per_class, config.train_subset,
                           seeds.split))
    order = codeword_order(config.bits, config.max_labels)
    book = HadamardCodebook.create(order, seeds.codebook)
    reducer = LshReducer.create(order, config.bits, seeds.reducer)
    log.info("codeword order %d for %d bits (%s reducer)", order, config.bits,
             "identity" if reducer.is_identity else "gaussian")
    model = init_model(train.features.shape[1], config.bits, config.eta,
                       seeds.model)
    table = TargetCodeTable(out_dim=config.bits)

    records = []

    def check_in(instances_seen, snapshot):
        queries = encode(snapshot, test.features, test.labels)
        database = encode(snapshot, retrieval.features, retrieval.labels)
        report = evaluate(queries, database, k_prec=config.k_prec,
                          k_map=config.k_map, n_threads=config.n_threads)
        records.append({"record": "checkpoint",
                        "instances_seen": instances_seen,
                        **report.to_record()})
        log.info("instances=%d mAP=%.4f P@%d=%.4f", instances_seen,
                 report.map, config.k_prec, report.precision_at_k)

    batches = stream(train, config.batch_size, seeds.stream)
    model, _ = train_stream(model, batches, book, reducer, table,
                            milestones=config.milestones, hook=check_in,
                            gradient=config.gradient)
    if not records or records[-1]["instances_seen"] < len(train):
        check_in(len(train), model)

    curve = [(rec["instances_seen"], rec["map"]) for rec in records]
    auc = map_curve_auc(curve) if len(curve) >= 2 else None
    summary = {"record": "summary", "auc": auc,
               "n_checkpoints": len(records),
               "final_map": records[-1]["map"],
               "final_precision_at_k": records[-1]["precision_at_k"],
               "bits": config.bits, "eta": config.eta,
               "batch_size": config.batch_size, "seed": config.seed,
               "repeat": config.repeat, "codeword_order": order,
               "reducer": "identity" if reducer.is_identity else "gaussian"}
    return TrainResult(records=records, summary=summary, model=model,
                       book=book, reducer=reducer, seeds=seeds, curve=curve)


def run_repeats(dataset: Dataset, config: RunConfig, repeats: int):
    """Run the protocol ``repeats`` times with derived per-repeat seeds.

    Returns (results, aggregate) where the aggregate dict carries the
    across-repeat means of the final metrics.
    """
    if repeats < 1:
        raise ConfigError(f"repeats must be >= 1, got {repeats}")
    results = [run_training(dataset, replace(config, repeat=i))
               for i in range(repeats)]
    maps = [r.summary["final_map"] for r in results]
    precs = [r.summary["final_precision_at_k"] for r in results]
    aucs = [r.summary["auc"] for r in results]
    aggregate = {
        "record": "aggregate", "bits": config.bits, "repeats": repeats,
        "map_mean": float(np.mean(maps)), "map_per_repeat": maps,
        "precision_mean": float(np.mean(precs)), "precision_per_repeat": precs,
        "auc_mean": (float(np.mean(aucs)) if all(a is not None for a in aucs)
                     else None),
    }
    return results, aggregate
