"""
Descriptive circulation reports
===============================

Each report is a table of raw numbers; rounding only happens when it is
rendered to csv, json or markdown.
"""

from loanmine import SyntheticConfig, generate_synthetic
from loanmine import report as rpt

data = generate_synthetic(SyntheticConfig(seed=5, n_students=250, n_other_patrons=60, n_checkouts=3000))

share = rpt.checkout_share_by_patron_type(data.circulation, data.patrons, year=2016)
print(rpt.render(share, "markdown"))

matrix = rpt.faculty_category_matrix(data.circulation, data.items, data.patrons, year=2016)
# percentage columns add up to 100 for every faculty with loans
print([round(t, 6) for t in matrix.share_totals()])

print(rpt.render(rpt.category_influencers(matrix, min_share=5.0), "markdown"))
print(rpt.render(rpt.lifespan_distribution(data.items, remove_uncirculated=True), "csv"))
