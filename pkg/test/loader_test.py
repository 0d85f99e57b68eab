# -*- mode: python; indent-tabs-mode: nil -*-

import logging

import pytest
import ujson

from hardy import dirichlet
from hwarp import loader, raster
from hwarp.loader import InputError


def sample(x, y, value, weight=None):
    s = {'x': x, 'y': y, 'value': value}
    if weight is not None:
        s['weight'] = weight
    return s


def test_parse_problem():
    xs, ys, values, weights, lam = loader.parse_problem({'lambda': 0.05,
                                                         'samples': [sample(0, 1, 2.5, 0.5),
                                                                     sample(1.5, 0.25, -1)]})
    assert xs == [0.0, 1.5]
    assert ys == [1.0, 0.25]
    assert values == [2.5, -1.0]
    assert weights == [0.5, None]
    assert lam == 0.05


def test_problem_without_lambda():
    *_, lam = loader.parse_problem({'samples': [sample(0, 1, 1)]})
    assert lam is None


@pytest.mark.parametrize('obj,field', [
    ([], None),
    ({}, 'samples'),
    ({'samples': []}, 'samples'),
    ({'samples': [sample(0, 0, 1)]}, 'samples[0].y'),
    ({'samples': [sample(0, -1, 1)]}, 'samples[0].y'),
    ({'samples': [sample(0, 1, 1), {'x': 0, 'y': 1}]}, 'samples[1]'),
    ({'samples': [sample(0, 1, 'one')]}, 'samples[0].value'),
    ({'samples': [sample(0, 1, True)]}, 'samples[0].value'),
    ({'samples': [sample(0, 1, 1, 0)]}, 'samples[0].weight'),
    ({'samples': [sample(0, 1, 1)], 'lambda': 0}, 'lambda'),
    ({'samples': [sample(0, 1, 1)], 'lambda': 'small'}, 'lambda'),
])
def test_problem_errors(obj, field):
    with pytest.raises(InputError) as e:
        loader.parse_problem(obj)
    assert e.value.field == field
    if field is not None:
        assert str(e.value).startswith(field + ':')


def test_input_error_is_a_value_error():
    assert issubclass(InputError, ValueError)


def test_missing_weights_get_arc_length_shares():
    xs = [0.0, 1.0, 1.0, 0.0]
    ys = [1.0, 1.0, 2.0, 2.0]
    shares = dirichlet.arc_length_weights(xs, ys)

    p = loader.build_problem(xs, ys, [1, 2, 3, 4], [None, 0.7, None, None], 0.01)
    assert p.lam == 0.01
    assert p.weights.tolist() == [shares[0], 0.7, shares[2], shares[3]]
    assert p.values.tolist() == [1.0, 2.0, 3.0, 4.0]

    p = loader.build_problem(xs, ys, [1, 2, 3, 4], [1, 2, 3, 4], 0.01)
    assert p.weights.tolist() == [1.0, 2.0, 3.0, 4.0]


def test_load_problem(tmp_path):
    path = tmp_path / 'problem.json'
    path.write_text(ujson.dumps({'samples': [sample(0, 1, 1, 1)], 'lambda': 0.01}))
    xs, ys, values, weights, lam = loader.load_problem(str(path))
    assert (xs, ys, values, weights, lam) == ([0.0], [1.0], [1.0], [1.0], 0.01)


def test_invalid_json(tmp_path):
    path = tmp_path / 'broken.json'
    path.write_text('{"samples": [')
    with pytest.raises(InputError):
        loader.load_problem(str(path))


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        loader.load_problem(str(tmp_path / 'nothing.json'))


def test_resolve_lambda(caplog):
    assert loader.resolve_lambda(None, None, 0.5) == 0.5
    assert loader.resolve_lambda(None, 0.1, 0.5) == 0.1

    with caplog.at_level(logging.WARNING, logger='loader'):
        assert loader.resolve_lambda(0.2, 0.2, 0.5) == 0.2
        assert not caplog.records
        assert loader.resolve_lambda(0.3, 0.1, 0.5) == 0.3
    assert len(caplog.records) == 1
    assert 'overrides' in caplog.records[0].getMessage()


def test_parse_correspondence():
    corr, lam = loader.parse_correspondence({'source': [[0, 0], [1, 0], [1, 1]],
                                             'target': [[0, 0], [2, 0], [2, 1]],
                                             'lambda': 1e-3})
    assert len(corr) == 3
    assert corr.target.tolist() == [[0.0, 0.0], [2.0, 0.0], [2.0, 1.0]]
    assert lam == 1e-3


@pytest.mark.parametrize('obj,field', [
    ('points', None),
    ({'target': [[0, 0]]}, 'source'),
    ({'source': [[0, 0], [1, 0], [1, 1]]}, 'target'),
    ({'source': [[0, 0], [1, 0], [1, 1]], 'target': [[0, 0], [1, 0]]}, 'target'),
    ({'source': [[0, 0], [1, 0]], 'target': [[0, 0], [1, 0]]}, 'source'),
    ({'source': [[0, 0], [1, 0], [0, 0]], 'target': [[0, 0], [1, 0], [1, 1]]}, 'source'),
    ({'source': [[0, 0], [1, 0], [1]], 'target': [[0, 0], [1, 0], [1, 1]]}, 'source[2]'),
    ({'source': [[0, 0], [1, 0], [1, 'a']], 'target': [[0, 0], [1, 0], [1, 1]]}, 'source[2]'),
])
def test_correspondence_errors(obj, field):
    with pytest.raises(InputError) as e:
        loader.parse_correspondence(obj)
    assert e.value.field == field


def test_correspondence_json_reads_back(tmp_path):
    corr = raster.quadratic_press(0.25, per_side=4)
    path = tmp_path / 'corr.json'
    path.write_text(loader.correspondence_json(corr, 1e-4))

    back, lam = loader.load_correspondence(str(path))
    assert lam == 1e-4
    assert back.source.tolist() == corr.source.tolist()
    assert back.target.tolist() == corr.target.tolist()
