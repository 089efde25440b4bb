"""
logic.py

F-restricted continuous-logic formulas: the syntax tree, a parser for the
text form, canonical printing and the fiberwise value semantics in [0, 1].

Values are enclosed in intervals. Connectives are evaluated exactly; the
quantifiers ask the fiber for a finite sample of its elements together with
a covering radius and widen the sampled extreme by the Lipschitz bound of the
quantified body.
"""
import logging
import math
import random
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Mapping, NamedTuple, Optional, Set, Tuple, Union

import pyparsing as pp

LOGGER = logging.getLogger(__name__)

COMPARATORS = ('<', '>', '<=', '>=')
KEYWORDS = frozenset(['inf', 'sup', 'half', 'not', 'max', 'min', 'd'])


class FormulaSyntaxError(ValueError):
    """Raised when condition text does not follow the formula grammar."""

    def __init__(self, msg, position=None, line=None, column=None):
        self.position = position
        self.line = line
        self.column = column
        if column is not None:
            msg = "syntax error at column {}: {}".format(column, msg)
        else:
            msg = "syntax error: {}".format(msg)
        super().__init__(msg)


class ThresholdError(ValueError):
    pass


class UnknownSymbolError(KeyError):
    def __str__(self):
        return str(self.args[0])


class UnboundVariableError(KeyError):
    def __str__(self):
        return "unbound variable '{}'".format(self.args[0])


##############################################################################
# Terms and formulas


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Apply:
    name: str
    args: Tuple = ()


Term = Union[Var, Apply]


@dataclass(frozen=True)
class Const:
    value: float

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError('Constant formulas take values in [0, 1].')


@dataclass(frozen=True)
class Half:
    arg: 'Formula'


@dataclass(frozen=True)
class Negation:
    """``1 -. arg``, kept as its own node so printing can round-trip."""
    arg: 'Formula'


@dataclass(frozen=True)
class TruncSub:
    left: 'Formula'
    right: 'Formula'


@dataclass(frozen=True)
class Max:
    left: 'Formula'
    right: 'Formula'


@dataclass(frozen=True)
class Min:
    left: 'Formula'
    right: 'Formula'


@dataclass(frozen=True)
class AtomDist:
    left: Term
    right: Term


@dataclass(frozen=True)
class AtomRel:
    name: str
    args: Tuple = ()


@dataclass(frozen=True)
class Inf:
    var: str
    body: 'Formula'


@dataclass(frozen=True)
class Sup:
    var: str
    body: 'Formula'


Formula = Union[Const, Half, Negation, TruncSub, Max, Min, AtomDist, AtomRel, Inf, Sup]

ZERO = Const(0.0)
ONE = Const(1.0)


@dataclass(frozen=True)
class Condition:
    """
    A formula compared with a threshold, the unit of satisfaction.

    Parameters
    ----------
    formula : Formula
        Left hand side.
    comparator : str
        One of ``<``, ``>``, ``<=``, ``>=``.
    threshold : float
        In (0, 1) for the strict comparators and in [0, 1] otherwise.

    Example
    -------
    >>> Condition(ONE, '<', 0.5).strict
    True
    """
    formula: Formula
    comparator: str
    threshold: float

    def __post_init__(self):
        if self.comparator not in COMPARATORS:
            raise ValueError(
                "Comparator must be one of {}.".format(', '.join(COMPARATORS)))
        if self.strict and not 0.0 < self.threshold < 1.0:
            raise ThresholdError(
                'Strict conditions need a threshold in (0, 1), got {}.'.format(self.threshold))
        if not self.strict and not 0.0 <= self.threshold <= 1.0:
            raise ThresholdError(
                'Non-strict conditions need a threshold in [0, 1], got {}.'.format(self.threshold))

    @property
    def strict(self):
        return self.comparator in ('<', '>')

    def __str__(self):
        return format_condition(self)


class ValueInterval(NamedTuple):
    """
    Enclosure ``[lower, upper]`` of a formula value.

    ``exhausted`` marks the widest interval returned when a quantifier sampler
    had nothing to offer.
    """
    lower: float
    upper: float
    exhausted: bool = False

    @classmethod
    def point(cls, value):
        value = min(1.0, max(0.0, float(value)))
        return cls(value, value)

    @classmethod
    def unknown(cls):
        return cls(0.0, 1.0, True)

    @property
    def width(self):
        return self.upper - self.lower

    @property
    def midpoint(self):
        return 0.5 * (self.lower + self.upper)

    def contains(self, value, tol=0.0):
        return self.lower - tol <= value <= self.upper + tol


def clamped(lower, upper, exhausted=False):
    lower = min(1.0, max(0.0, lower))
    upper = min(1.0, max(0.0, upper))
    if lower > upper:
        lower = upper
    return ValueInterval(lower, upper, exhausted)


##############################################################################
# Signatures and fibers


@dataclass(frozen=True)
class Symbol:
    """
    A relation or function symbol with its arity and Lipschitz constant.

    The modulus of uniform continuity is ``eps / lipschitz``; an infinite
    constant means no usable modulus is known.
    """
    name: str
    arity: int
    lipschitz: float = 1.0

    def modulus(self, eps):
        if self.lipschitz == 0:
            return math.inf
        return eps / self.lipschitz


@dataclass(frozen=True)
class Signature:
    relations: Mapping[str, Symbol] = field(default_factory=dict)
    functions: Mapping[str, Symbol] = field(default_factory=dict)
    constants: FrozenSet[str] = frozenset()

    @classmethod
    def build(cls, relations=None, functions=None, constants=()):
        """
        Build a signature from ``{name: (arity, lipschitz)}`` dictionaries.

        Example
        -------
        >>> sig = Signature.build(relations={'P': (2, 3.2)}, functions={'mul': (2, 1.0)})
        >>> sig.relations['P'].arity
        2
        """
        relations = relations or {}
        functions = functions or {}
        return cls({k: Symbol(k, *v) for k, v in relations.items()},
                   {k: Symbol(k, *v) for k, v in functions.items()},
                   frozenset(constants))


class ElementSample(NamedTuple):
    """Finite sample of a fiber; every element lies within ``radius`` of one of them."""
    elements: tuple
    radius: float


class Fiber(object):
    """
    The metric structure sitting over one point of a base space.

    Subclasses implement the distance and the signature symbols. ``sample``
    feeds the fiber-level quantifiers; the default offers nothing, which makes
    every quantified value the widest interval.
    """

    signature = Signature()

    def distance(self, a, b):
        raise NotImplementedError

    def relation(self, name, args):
        raise UnknownSymbolError("unknown relation symbol '{}'".format(name))

    def function(self, name, args):
        raise UnknownSymbolError("unknown function symbol '{}'".format(name))

    def constant(self, name):
        raise UnknownSymbolError("unknown constant symbol '{}'".format(name))

    def sample(self, size=64):
        return ElementSample((), math.inf)


##############################################################################
# Parsing and printing


def _fold_truncsub(tokens):
    acc = tokens[0]
    for i, nxt in enumerate(tokens[1:]):
        if i == 0 and acc == ONE:
            acc = Negation(nxt)
        else:
            acc = TruncSub(acc, nxt)
    return acc


def _constant(text, loc, tokens):
    try:
        return Const(float(tokens[0]))
    except ValueError as err:
        raise pp.ParseFatalException(text, loc, str(err)) from None


def _abs_value(tokens):
    inner = tokens[0]
    if isinstance(inner, TruncSub):
        return Max(inner, TruncSub(inner.right, inner.left))
    return inner


def _make_grammar():
    LPAR, RPAR, COMMA, DOT, BAR = map(pp.Suppress, "(),.|")
    ident = pp.Word(pp.alphas + "_", pp.alphanums + "_'")
    name = ~pp.MatchFirst([pp.Keyword(k) for k in sorted(KEYWORDS)]) + ident

    term = pp.Forward()
    arglist = pp.Group(LPAR + pp.Optional(pp.DelimitedList(term)) + RPAR)
    application = (name + arglist).set_parse_action(lambda t: Apply(t[0], tuple(t[1])))
    variable = name.copy().set_parse_action(lambda t: Var(t[0]))
    term <<= application | variable

    formula = pp.Forward()
    number = pp.Regex(r"(\d+(\.\d+)?|\.\d+)([eE][-+]?\d+)?")
    number.set_parse_action(_constant)

    half = (pp.Keyword('half').suppress() + LPAR + formula + RPAR).set_parse_action(
        lambda t: Half(t[0]))
    negation = (pp.Keyword('not').suppress() + LPAR + formula + RPAR).set_parse_action(
        lambda t: Negation(t[0]))
    maximum = (pp.Keyword('max').suppress() + LPAR + formula + COMMA + formula + RPAR
               ).set_parse_action(lambda t: Max(t[0], t[1]))
    minimum = (pp.Keyword('min').suppress() + LPAR + formula + COMMA + formula + RPAR
               ).set_parse_action(lambda t: Min(t[0], t[1]))
    dist = (pp.Keyword('d').suppress() + LPAR + term + COMMA + term + RPAR).set_parse_action(
        lambda t: AtomDist(t[0], t[1]))
    quantifier = (
        (pp.Keyword('inf') | pp.Keyword('sup')) + ident + DOT + formula
    ).set_parse_action(lambda t: (Inf if t[0] == 'inf' else Sup)(t[1], t[2]))
    absval = (BAR + formula + BAR).set_parse_action(_abs_value)
    relation = (name + arglist).set_parse_action(lambda t: AtomRel(t[0], tuple(t[1])))
    nullary = name.copy().set_parse_action(lambda t: AtomRel(t[0], ()))
    paren = LPAR + formula + RPAR

    atom = (number | half | negation | maximum | minimum | dist | quantifier
            | absval | paren | relation | nullary)
    formula <<= (atom + pp.ZeroOrMore(pp.Suppress('-.') + atom)).set_parse_action(
        _fold_truncsub)

    comparator = pp.one_of(list(COMPARATORS))
    threshold = pp.Regex(r"[-+]?(\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?")
    condition = formula + comparator + threshold
    return formula, condition


_FORMULA, _CONDITION = _make_grammar()


def _check_balance(text):
    opened = []
    for pos, ch in enumerate(text):
        if ch == '(':
            opened.append(pos)
        elif ch == ')':
            if not opened:
                raise FormulaSyntaxError('unbalanced parenthesis', pos, 1, pos + 1)
            opened.pop()
    if opened:
        pos = opened[-1]
        raise FormulaSyntaxError('unbalanced parenthesis', pos, 1, pos + 1)


def _run(grammar, text):
    _check_balance(text)
    try:
        return grammar.parse_string(text, parse_all=True)
    except pp.ParseBaseException as err:
        raise FormulaSyntaxError(err.msg, err.loc, err.lineno, err.col) from None


def parse_formula(text: str, signature: Optional[Signature] = None, names: Iterable[str] = ()):
    """
    Parse the text form of a formula.

    Parameters
    ----------
    text : str
        Formula text, e.g. ``max(d(s1,s2), 1 -. P(s1,s2))``.
    signature : Signature, optional
        When given, relation and function symbols are checked against it.
    names : iterable of str
        Extra nullary names allowed as atoms (bound real-sort sections).

    Returns
    -------
    Formula

    Example
    -------
    >>> parse_formula('max(0, half(1))')
    Max(left=Const(value=0.0), right=Half(arg=Const(value=1.0)))
    """
    formula = _run(_FORMULA, text)[0]
    if signature is not None:
        check_symbols(formula, signature, names)
    return formula


def parse_condition(text: str, signature: Optional[Signature] = None, names: Iterable[str] = ()):
    """
    Parse a condition ``formula cmp threshold``.

    ``-.`` is truncated subtraction, left associative and of lowest precedence;
    ``1 -. phi`` is read as the negation of ``phi``.

    Parameters
    ----------
    text : str
        Condition text.
    signature : Signature, optional
        When given, unknown relation or function symbols are rejected.
    names : iterable of str
        Extra nullary atom names accepted by the symbol check.

    Returns
    -------
    Condition

    Raises
    ------
    FormulaSyntaxError
        Malformed text; the error carries the position.
    UnknownSymbolError
        A symbol missing from ``signature`` or used with the wrong arity.
    ThresholdError
        A strict threshold outside (0, 1).

    Example
    -------
    >>> cond = parse_condition('inf s. Ea(s) -. nrm < 0.1')
    >>> cond.formula
    Inf(var='s', body=TruncSub(left=AtomRel(name='Ea', args=(Var(name='s'),)), right=AtomRel(name='nrm', args=())))
    >>> cond.comparator, cond.threshold
    ('<', 0.1)
    """
    tokens = _run(_CONDITION, text)
    formula, comparator, threshold = tokens[0], tokens[1], float(tokens[2])
    if signature is not None:
        check_symbols(formula, signature, names)
    return Condition(formula, comparator, threshold)


def check_symbols(formula, signature: Signature, names: Iterable[str] = ()):
    """Raise UnknownSymbolError for symbols missing from ``signature``."""
    names = set(names)

    def check_term(term):
        if isinstance(term, Apply):
            if not term.args and term.name in signature.constants:
                return
            sym = signature.functions.get(term.name)
            if sym is None:
                raise UnknownSymbolError("unknown function symbol '{}'".format(term.name))
            if sym.arity != len(term.args):
                raise UnknownSymbolError("function '{}' takes {} arguments, got {}".format(
                    term.name, sym.arity, len(term.args)))
            for arg in term.args:
                check_term(arg)

    for node in walk(formula):
        if isinstance(node, AtomDist):
            check_term(node.left)
            check_term(node.right)
        elif isinstance(node, AtomRel):
            if not node.args and node.name in names:
                continue
            sym = signature.relations.get(node.name)
            if sym is None:
                raise UnknownSymbolError("unknown relation symbol '{}'".format(node.name))
            if sym.arity != len(node.args):
                raise UnknownSymbolError("relation '{}' takes {} arguments, got {}".format(
                    node.name, sym.arity, len(node.args)))
            for arg in node.args:
                check_term(arg)


def _format_number(value):
    if value == 0.0:
        return '0'
    if value == 1.0:
        return '1'
    return repr(float(value))


def format_term(term):
    if isinstance(term, Var):
        return term.name
    return "{}({})".format(term.name, ', '.join(format_term(a) for a in term.args))


def format_formula(formula):
    """
    Canonical text of a formula; ``parse_formula`` inverts it.

    Example
    -------
    >>> format_formula(parse_formula('max(d(s1,s2), 1 -. P(s1,s2))'))
    'max(d(s1, s2), not(P(s1, s2)))'
    """
    if isinstance(formula, Const):
        return _format_number(formula.value)
    if isinstance(formula, Half):
        return "half({})".format(format_formula(formula.arg))
    if isinstance(formula, Negation):
        return "not({})".format(format_formula(formula.arg))
    if isinstance(formula, Max):
        return "max({}, {})".format(format_formula(formula.left), format_formula(formula.right))
    if isinstance(formula, Min):
        return "min({}, {})".format(format_formula(formula.left), format_formula(formula.right))
    if isinstance(formula, AtomDist):
        return "d({}, {})".format(format_term(formula.left), format_term(formula.right))
    if isinstance(formula, AtomRel):
        if not formula.args:
            return formula.name
        return "{}({})".format(formula.name, ', '.join(format_term(a) for a in formula.args))
    if isinstance(formula, (Inf, Sup)):
        word = 'inf' if isinstance(formula, Inf) else 'sup'
        return "{} {}. {}".format(word, formula.var, format_formula(formula.body))
    if isinstance(formula, TruncSub):
        left = format_formula(formula.left)
        right = format_formula(formula.right)
        if isinstance(formula.left, (Inf, Sup)):
            left = "(" + left + ")"
        if isinstance(formula.right, (Inf, Sup, TruncSub)):
            right = "(" + right + ")"
        return "{} -. {}".format(left, right)
    raise TypeError("Not a formula: {!r}".format(formula))


def format_condition(cond: Condition):
    return "{} {} {}".format(format_formula(cond.formula), cond.comparator,
                             repr(float(cond.threshold)))


##############################################################################
# Structural helpers


def walk(formula):
    """Yield every node of ``formula`` in prefix order."""
    yield formula
    if isinstance(formula, (Half, Negation)):
        yield from walk(formula.arg)
    elif isinstance(formula, (TruncSub, Max, Min)):
        yield from walk(formula.left)
        yield from walk(formula.right)
    elif isinstance(formula, (Inf, Sup)):
        yield from walk(formula.body)


def _term_vars(term):
    if isinstance(term, Var):
        return {term.name}
    out = set()
    for arg in term.args:
        out |= _term_vars(arg)
    return out


def free_variables(formula, signature: Optional[Signature] = None) -> Set[str]:
    """
    Section variables of ``formula`` not bound by a quantifier.

    Constant symbols of ``signature`` are not variables.

    Example
    -------
    >>> sorted(free_variables(Inf('s', AtomDist(Var('s'), Var('t')))))
    ['t']
    >>> free_variables(ONE)
    set()
    """
    constants = signature.constants if signature is not None else frozenset()
    if isinstance(formula, Const):
        return set()
    if isinstance(formula, (Half, Negation)):
        return free_variables(formula.arg, signature)
    if isinstance(formula, (TruncSub, Max, Min)):
        return free_variables(formula.left, signature) | free_variables(formula.right, signature)
    if isinstance(formula, AtomDist):
        return (_term_vars(formula.left) | _term_vars(formula.right)) - constants
    if isinstance(formula, AtomRel):
        out = set()
        for arg in formula.args:
            out |= _term_vars(arg)
        return out - constants
    if isinstance(formula, (Inf, Sup)):
        return free_variables(formula.body, signature) - {formula.var}
    raise TypeError("Not a formula: {!r}".format(formula))


def depth(formula):
    """Height of the syntax tree; atoms have depth 0."""
    if isinstance(formula, (Const, AtomDist, AtomRel)):
        return 0
    if isinstance(formula, (Half, Negation)):
        return 1 + depth(formula.arg)
    if isinstance(formula, (TruncSub, Max, Min)):
        return 1 + max(depth(formula.left), depth(formula.right))
    return 1 + depth(formula.body)


def is_quantifier_free(formula):
    return not any(isinstance(node, (Inf, Sup)) for node in walk(formula))


def is_restricted(cond: Condition):
    """
    True when ``cond`` has the shape covered by truth continuity: a strict
    ``<`` condition whose only quantifier is inf, or a strict ``>`` condition
    whose only quantifier is sup.
    """
    if cond.comparator == '<':
        banned = Sup
    elif cond.comparator == '>':
        banned = Inf
    else:
        return False
    return not any(isinstance(node, banned) for node in walk(cond.formula))


def _term_lipschitz(term, var, signature):
    if isinstance(term, Var):
        return 1.0 if term.name == var else 0.0
    inner = [_term_lipschitz(arg, var, signature) for arg in term.args]
    if not any(inner):
        return 0.0
    sym = signature.functions.get(term.name)
    scale = sym.lipschitz if sym is not None else math.inf
    return scale * sum(inner)


def lipschitz_bound(formula, var: str, signature: Signature) -> float:
    """
    Upper bound on how fast the value of ``formula`` moves when the element
    bound to ``var`` moves by one unit of fiber distance.

    Example
    -------
    >>> phi = parse_formula('max(d(s, t), half(d(s, s)))')
    >>> lipschitz_bound(phi, 's', Signature())
    2.0
    """
    if isinstance(formula, Const):
        return 0.0
    if isinstance(formula, Half):
        return 0.5 * lipschitz_bound(formula.arg, var, signature)
    if isinstance(formula, Negation):
        return lipschitz_bound(formula.arg, var, signature)
    if isinstance(formula, (TruncSub, Max, Min)):
        return (lipschitz_bound(formula.left, var, signature)
                + lipschitz_bound(formula.right, var, signature))
    if isinstance(formula, AtomDist):
        return (_term_lipschitz(formula.left, var, signature)
                + _term_lipschitz(formula.right, var, signature))
    if isinstance(formula, AtomRel):
        inner = [_term_lipschitz(arg, var, signature) for arg in formula.args]
        if not any(inner):
            return 0.0
        sym = signature.relations.get(formula.name)
        scale = sym.lipschitz if sym is not None else math.inf
        return scale * sum(inner)
    if formula.var == var:
        return 0.0
    return lipschitz_bound(formula.body, var, signature)


##############################################################################
# Fiberwise semantics


def term_value(fiber: Fiber, term, binding: Mapping):
    """Interpret ``term`` in ``fiber`` under ``binding``."""
    if isinstance(term, Var):
        if term.name in binding:
            return binding[term.name]
        if term.name in fiber.signature.constants:
            return fiber.constant(term.name)
        raise UnboundVariableError(term.name)
    if not term.args and term.name in fiber.signature.constants:
        return fiber.constant(term.name)
    return fiber.function(term.name, [term_value(fiber, a, binding) for a in term.args])


def eval_formula(fiber: Fiber, formula, binding: Optional[Mapping] = None,
                 sample_size: int = 64) -> ValueInterval:
    """
    Enclose the continuous-logic value of ``formula`` in ``fiber``.

    Parameters
    ----------
    fiber : Fiber
        The structure to evaluate in.
    formula : Formula
        Formula whose free variables are all bound.
    binding : dict
        Variable name to fiber element. A name bound to a float is read as a
        real-sort value already scaled to [0, 1].
    sample_size : int
        Requested size of the element sample used by quantifiers.

    Returns
    -------
    ValueInterval
        Connectives are exact; quantified values are widened by the sampler's
        covering radius times the Lipschitz bound of the body.

    Example
    -------
    >>> eval_formula(Fiber(), TruncSub(ONE, ONE))
    ValueInterval(lower=0.0, upper=0.0, exhausted=False)
    >>> eval_formula(Fiber(), Max(ZERO, Half(ONE)))
    ValueInterval(lower=0.5, upper=0.5, exhausted=False)
    """
    binding = dict(binding or {})
    return _eval(fiber, formula, binding, sample_size)


def _eval(fiber, formula, binding, sample_size):
    if isinstance(formula, Const):
        return ValueInterval(formula.value, formula.value)
    if isinstance(formula, AtomDist):
        a = term_value(fiber, formula.left, binding)
        b = term_value(fiber, formula.right, binding)
        return ValueInterval.point(fiber.distance(a, b))
    if isinstance(formula, AtomRel):
        if not formula.args and formula.name in binding:
            return ValueInterval.point(binding[formula.name])
        args = [term_value(fiber, a, binding) for a in formula.args]
        return ValueInterval.point(fiber.relation(formula.name, args))
    if isinstance(formula, Half):
        v = _eval(fiber, formula.arg, binding, sample_size)
        return ValueInterval(0.5 * v.lower, 0.5 * v.upper, v.exhausted)
    if isinstance(formula, Negation):
        v = _eval(fiber, formula.arg, binding, sample_size)
        return ValueInterval(1.0 - v.upper, 1.0 - v.lower, v.exhausted)
    if isinstance(formula, (TruncSub, Max, Min)):
        a = _eval(fiber, formula.left, binding, sample_size)
        b = _eval(fiber, formula.right, binding, sample_size)
        exhausted = a.exhausted or b.exhausted
        if isinstance(formula, TruncSub):
            return clamped(a.lower - b.upper, a.upper - b.lower, exhausted)
        if isinstance(formula, Max):
            return ValueInterval(max(a.lower, b.lower), max(a.upper, b.upper), exhausted)
        return ValueInterval(min(a.lower, b.lower), min(a.upper, b.upper), exhausted)
    if isinstance(formula, (Inf, Sup)):
        sample = fiber.sample(sample_size)
        if not sample.elements:
            LOGGER.warning("fiber sampler returned no elements for '%s'", formula.var)
            return ValueInterval.unknown()
        values = []
        for element in sample.elements:
            inner = dict(binding)
            inner[formula.var] = element
            values.append(_eval(fiber, formula.body, inner, sample_size))
        slack = 0.0
        if sample.radius > 0:
            lipschitz = lipschitz_bound(formula.body, formula.var, fiber.signature)
            slack = lipschitz * sample.radius if lipschitz > 0 else 0.0
        exhausted = any(v.exhausted for v in values)
        if isinstance(formula, Inf):
            return clamped(min(v.lower for v in values) - slack,
                           min(v.upper for v in values), exhausted)
        return clamped(max(v.lower for v in values),
                       max(v.upper for v in values) + slack, exhausted)
    raise TypeError("Not a formula: {!r}".format(formula))


##############################################################################
# Random conditions


def random_formula(rng: random.Random, max_depth: int, variables, functions=(),
                   relations=(), quantifiers: int = 1, fresh=('u', 'v', 'w')):
    """
    Draw a formula of depth at most ``max_depth``.

    Parameters
    ----------
    rng : random.Random
        Source of randomness; fixing its seed fixes the output.
    max_depth : int
        Maximum height of the tree.
    variables : sequence of str
        Free variables available to atoms.
    functions : sequence of Symbol
        Function symbols usable in terms.
    relations : sequence of Symbol
        Relation symbols usable as atoms.
    quantifiers : int
        Maximum number of quantifier nodes.
    fresh : sequence of str
        Names for quantified variables.
    """
    budget = [quantifiers]
    fresh = list(fresh)

    def term(scope):
        var = Var(rng.choice(scope))
        if functions and rng.random() < 0.3:
            sym = rng.choice(list(functions))
            return Apply(sym.name, tuple(Var(rng.choice(scope)) for _ in range(sym.arity)))
        return var

    def atom(scope):
        roll = rng.random()
        if roll < 0.1:
            return rng.choice([ZERO, ONE])
        if relations and roll < 0.35:
            sym = rng.choice(list(relations))
            return AtomRel(sym.name, tuple(term(scope) for _ in range(sym.arity)))
        return AtomDist(term(scope), term(scope))

    def build(level, scope):
        if level == 0:
            return atom(scope)
        roll = rng.random()
        if budget[0] > 0 and len(scope) < len(variables) + len(fresh) and roll < 0.3:
            budget[0] -= 1
            name = fresh[len(scope) - len(variables)]
            node = Inf if rng.random() < 0.5 else Sup
            return node(name, build(level - 1, scope + [name]))
        if roll < 0.45:
            return Half(build(level - 1, scope))
        if roll < 0.6:
            return Negation(build(level - 1, scope))
        if roll < 0.75:
            left = build(level - 1, scope)
            right = build(level - 1, scope)
            return Negation(right) if left == ONE else TruncSub(left, right)
        if roll < 0.9:
            return Max(build(level - 1, scope), build(level - 1, scope))
        return Min(build(level - 1, scope), build(level - 1, scope))

    return build(max_depth, list(variables))


def random_condition(rng: random.Random, max_depth: int, variables, functions=(),
                     relations=(), quantifiers: int = 1, strict_only: bool = True):
    """Draw a random condition; thresholds are drawn from [0.05, 0.95]."""
    formula = random_formula(rng, max_depth, variables, functions, relations, quantifiers)
    comparators = ('<', '>') if strict_only else COMPARATORS
    return Condition(formula, rng.choice(comparators), round(rng.uniform(0.05, 0.95), 4))


if __name__ == "__main__":
    import doctest
    doctest.testmod()
