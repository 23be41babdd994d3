from __future__ import annotations

import numpy as np

from physmocap.contact import mlp
from physmocap.contact.predict import (
    ContactClassifier,
    load_classifier,
    save_classifier,
    vote_labels,
)


def test_vote_labels_interior_majority():
    T = 9
    preds = np.zeros((T, 5, 4), dtype=bool)
    # every window predicts frame 4 as contact for joint 0
    for k in range(5):
        preds[4 - (k - 2), k, 0] = True
    out = vote_labels(preds, T)
    assert out[4, 0]
    assert not out[4, 1]


def test_vote_labels_majority_beats_minority():
    T = 7
    preds = np.zeros((T, 5, 4), dtype=bool)
    # frame 3 gets 5 votes for joint 1; make 2 positive, 3 negative -> flight
    contributors = [(3 - (k - 2), k) for k in range(5)]
    for (t, k) in contributors[:2]:
        preds[t, k, 1] = True
    assert not vote_labels(preds, T)[3, 1]
    # 3 of 5 positive -> contact
    for (t, k) in contributors[:3]:
        preds[t, k, 1] = True
    assert vote_labels(preds, T)[3, 1]


def test_vote_labels_tie_is_contact():
    # frame 1 receives 4 votes (targets 0..3); a 2-2 split must give contact
    T = 5
    preds = np.zeros((T, 5, 4), dtype=bool)
    contributors = [(1 - (k - 2), k) for k in range(5)]
    valid = [(t, k) for t, k in contributors if 0 <= t < T]
    assert len(valid) == 4
    for (t, k) in valid[:2]:
        preds[t, k, 2] = True
    assert vote_labels(preds, T)[1, 2]


def test_checkpoint_round_trip_bit_exact(tmp_path):
    state = mlp.init_mlp(sizes=(12, 16, 10, 6, 5, 8), seed=9)
    clf = ContactClassifier(state=state, feature_scale=0.004, seed=9)
    path = tmp_path / "clf.npz"
    save_classifier(clf, path)
    back = load_classifier(path)
    assert back.feature_scale == 0.004
    assert back.state.sizes == state.sizes
    for a, b in zip(state.W, back.state.W):
        assert np.array_equal(a, b)
    for a, b in zip(state.run_var, back.state.run_var):
        assert np.array_equal(a, b)
    X = np.random.default_rng(1).normal(0, 1, (3, 12))
    la, _ = mlp.mlp_forward(state, X, training=False)
    lb, _ = mlp.mlp_forward(back.state, X, training=False)
    assert np.array_equal(la, lb)
