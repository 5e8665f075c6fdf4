from .market import (
    MarketSpec,
    PortfolioChoice,
    belief_moments,
    closed_form_share,
    indirect_utility,
    make_problem,
    portfolio_frame,
)

__all__ = [
    'MarketSpec',
    'PortfolioChoice',
    'belief_moments',
    'closed_form_share',
    'indirect_utility',
    'make_problem',
    'portfolio_frame',
]
