"""Source text to verified witness, end to end."""

import pytest

from lf2hh.bench import corpus_text
from lf2hh.lfsyntax import Lam, Pi, to_str
from lf2hh.pipeline import (
    PipelineError,
    load_signature,
    prepare_query,
    solve_query,
    translate,
)
from lf2hh.translate import TranslateOptions

GROUND_APPEND = "append (cons z nil) (cons (s z) nil) (cons z (cons (s z) nil))"


def test_load_signature_checks_and_canonicalizes():
    loaded = load_signature(corpus_text("append"), "append.elf")
    assert loaded.ok and loaded.context is not None
    # canonicalization rewrites the arrow sugar into an eta-long product:
    # every classifier in the prepared context is already canonical
    s_entry = loaded.context.lookup("s")
    assert isinstance(s_entry.classifier, Pi)


def test_load_signature_reports_ill_formed_declarations():
    loaded = load_signature("nat : type.\nbroken : nat nat.\n", "bad.elf")
    assert not loaded.ok
    assert loaded.context is None
    assert loaded.report.failure is not None


def test_prepare_query_kind_checks():
    loaded = load_signature(corpus_text("append"))
    qt = prepare_query(loaded, GROUND_APPEND)
    assert to_str(qt).startswith("append (cons z nil)")
    with pytest.raises(PipelineError):
        prepare_query(loaded, "append nil")  # not fully applied
    with pytest.raises(PipelineError):
        prepare_query(loaded, "cons z nil")  # an object, not a type


def test_prepare_query_canonicalizes_eta_short_indices():
    loaded = load_signature(corpus_text("num"))
    qt = prepare_query(loaded, "atz (num_n z)")
    assert to_str(qt) == "atz (num_n z)"


def test_queries_against_broken_signatures_are_refused():
    loaded = load_signature("nat : type.\nbroken : nat nat.\n")
    with pytest.raises(PipelineError):
        prepare_query(loaded, "nat")
    with pytest.raises(PipelineError):
        translate(loaded, TranslateOptions(mode="simple"))


def test_solve_query_proves_and_verifies(append_sig_text=None):
    loaded = load_signature(corpus_text("append"))
    qt = prepare_query(loaded, GROUND_APPEND)
    for mode in ("simple", "optimized"):
        outcome = solve_query(loaded, qt, TranslateOptions(mode=mode))
        assert outcome.status == "proved"
        assert outcome.any_verified
        (wr,) = outcome.results
        assert wr.verified and wr.decode_error is None
        assert to_str(wr.decoded).startswith("appCons z nil")
        assert outcome.stats is not None and outcome.stats.answers == 1


def test_solve_query_reports_exhaustive_failure():
    loaded = load_signature(corpus_text("append"))
    qt = prepare_query(loaded, "append (cons z nil) nil nil")
    outcome = solve_query(loaded, qt, TranslateOptions(mode="optimized"))
    assert outcome.status == "failed"
    assert outcome.results == ()


def test_solve_query_reports_budget_exhaustion():
    loaded = load_signature(corpus_text("append"))
    qt = prepare_query(loaded, GROUND_APPEND)
    outcome = solve_query(
        loaded, qt, TranslateOptions(mode="simple"), budget=3
    )
    assert outcome.status == "budget"
    assert "budget" in outcome.detail or outcome.detail


def test_solve_query_reports_residuals():
    loaded = load_signature(corpus_text("num"))
    qt = prepare_query(loaded, "atz (num_n z)")
    options = TranslateOptions(mode="optimized", relaxed_init=True)
    outcome = solve_query(loaded, qt, options)
    assert outcome.status == "residual"


def test_verification_flags_the_unsound_relaxed_answer():
    # relaxed translation plus guessing produces a witness that decodes
    # fine but fails the checker; the same query under the shipping rules
    # verifies cleanly
    loaded = load_signature(corpus_text("num"))
    qt = prepare_query(loaded, "atz (num_n z)")
    relaxed = TranslateOptions(mode="optimized", relaxed_init=True)
    outcome = solve_query(
        loaded, qt, relaxed, guess_residuals=True, until_verified=True,
        max_answers=None,
    )
    assert outcome.status == "proved"
    assert not outcome.any_verified
    (wr,) = outcome.results
    assert wr.decode_error is None and wr.verified is False

    strict = solve_query(loaded, qt, TranslateOptions(mode="optimized"))
    assert strict.status == "proved" and strict.any_verified


def test_pi_query_witness_decodes_to_a_lambda():
    loaded = load_signature(corpus_text("append"))
    qt = prepare_query(loaded, "{w:nat} nat")
    outcome = solve_query(loaded, qt, TranslateOptions(mode="optimized"))
    (wr,) = outcome.results
    assert isinstance(wr.decoded, Lam)
    assert wr.verified
