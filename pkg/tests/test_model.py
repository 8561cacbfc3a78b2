import pytest
from hypothesis import given, strategies as st

from distsched.model import (
    ClusterState,
    LabelParseError,
    Magnitude,
    ModelError,
    Node,
    Pattern,
    PodSpec,
    ResourceKind,
    ScopedLabel,
    ScopeLevel,
    UsageLabel,
    ValidationError,
    all_labels,
    parse_label,
    scoped_label,
)

from helpers import pod

TAXONOMY = [
    f"{r}-{m}-{p}"
    for r in ("memory", "cpu", "network", "storage")
    for p in ("always", "spike", "gradual")
    for m in ("high", "medium", "low")
]


def test_enum_members():
    assert [str(r) for r in ResourceKind] == ["cpu", "memory", "network", "storage"]
    assert [str(p) for p in Pattern] == ["always", "spike", "gradual"]
    assert [str(s) for s in ScopeLevel] == ["cluster", "namespace", "application"]
    assert Magnitude.LOW < Magnitude.MEDIUM < Magnitude.HIGH
    assert max(Magnitude) is Magnitude.HIGH


@pytest.mark.parametrize("text", TAXONOMY)
def test_taxonomy_round_trip(text):
    label = parse_label(text)
    assert str(label) == text
    assert parse_label(str(label)) == label


def test_all_labels_is_the_taxonomy():
    assert sorted(str(l) for l in all_labels()) == sorted(TAXONOMY)
    assert len(set(all_labels())) == 36


@pytest.mark.parametrize(
    "text,expected",
    [
        ("memory-high-always", (ResourceKind.MEMORY, Magnitude.HIGH, Pattern.ALWAYS)),
        ("cpu-low-spike", (ResourceKind.CPU, Magnitude.LOW, Pattern.SPIKE)),
    ],
)
def test_parse_examples(text, expected):
    assert parse_label(text) == UsageLabel(*expected)


def test_parse_names_bad_token():
    with pytest.raises(LabelParseError) as err:
        parse_label("cpu-extreme-spike")
    assert err.value.token == "extreme"
    assert "extreme" in str(err.value)


@pytest.mark.parametrize("text", ["", "cpu-high", "cpu-high-always-x", "gpu-high-always", "cpu-high-bursty"])
def test_parse_rejects(text):
    with pytest.raises(ModelError):
        parse_label(text)


def test_scoped_label_examples():
    base = parse_label("cpu-low-spike")
    cluster = pod("p", "cpu-low-spike", ns="payments", app="gateway")
    ns = pod("p", "cpu-low-spike", ns="payments", app="gateway", scope=ScopeLevel.NAMESPACE)
    app = pod("p", "cpu-low-spike", ns="payments", app="gateway", scope=ScopeLevel.APPLICATION)
    assert scoped_label(cluster, base).render() == "cpu-low-spike"
    assert scoped_label(ns, base).render() == "cpu-low-spike-payments"
    assert scoped_label(app, base).render() == "cpu-low-spike-payments-gateway"
    assert scoped_label(app, base).scope is ScopeLevel.APPLICATION


def test_scoped_label_requires_carried_label():
    with pytest.raises(ModelError):
        scoped_label(pod("p", "cpu-low-spike"), parse_label("cpu-high-spike"))


def test_application_scope_needs_namespace():
    with pytest.raises(ModelError):
        ScopedLabel(parse_label("cpu-low-spike"), None, "gateway")


names = st.from_regex(r"[a-z0-9]([a-z0-9-]{0,10}[a-z0-9])?", fullmatch=True)


@given(st.sampled_from(all_labels()), names, names)
def test_scope_renderings_are_strict_prefixes(label, ns, app):
    p = PodSpec("p", ns, app, frozenset([label]))
    rendered = [
        scoped_label(PodSpec("p", ns, app, frozenset([label]), s), label).render()
        for s in ScopeLevel
    ]
    assert rendered[1].startswith(rendered[0]) and rendered[1] != rendered[0]
    assert rendered[2].startswith(rendered[1]) and rendered[2] != rendered[1]
    assert scoped_label(p, label).render() == str(label)


@pytest.mark.parametrize("bad", ["Payments", "-pay", "pay-", "pay_ments", ""])
def test_namespace_charset(bad):
    with pytest.raises(ModelError):
        pod("p", ns=bad)


def test_one_label_per_resource():
    with pytest.raises(ModelError):
        pod("p", "cpu-high-always", "cpu-low-spike")
    assert len(pod("p", "cpu-high-always", "memory-low-spike").labels) == 2


def test_cluster_canonical_order():
    state = ClusterState([Node("10.46.7.8"), Node("10.220.45.89"), Node("10.220.45.2")])
    assert state.node_ids == ("10.220.45.2", "10.220.45.89", "10.46.7.8")


def test_cluster_rejects_duplicate_nodes():
    with pytest.raises(ValidationError) as err:
        ClusterState([Node("a"), Node("a")])
    assert err.value.entity == "a"


def test_cluster_rejects_unknown_node():
    with pytest.raises(ValidationError) as err:
        ClusterState([Node("a")], [pod("p")], {"p": "b"})
    assert err.value.entity == "b"


def test_cluster_rejects_unknown_pod():
    with pytest.raises(ValidationError) as err:
        ClusterState([Node("a")], [], {"ghost": "a"})
    assert err.value.entity == "ghost"


def test_cluster_rejects_capacity_violation():
    with pytest.raises(ValidationError) as err:
        ClusterState([Node("a", 1)], [pod("p"), pod("q")], {"p": "a", "q": "a"})
    assert err.value.entity == "a"


def test_state_operations_are_non_mutating():
    s0 = ClusterState([Node("a"), Node("b")])
    s1 = s0.assign(pod("p"), "a")
    assert s0.assignment == {} and s1.assignment == {"p": "a"}
    assert s1.pod_count("a") == 1 and s1.pod_count("b") == 0
    s2 = s1.unassign("p")
    assert "p" in s2.pods and "p" not in s2.assignment
    s3 = s1.remove_pod("p")
    assert s3 == s0
    assert s3.fingerprint == s0.fingerprint != s1.fingerprint


def test_has_room():
    s = ClusterState([Node("a", 1), Node("b")], [pod("p")], {"p": "a"})
    assert not s.has_room("a") and s.has_room("b")
