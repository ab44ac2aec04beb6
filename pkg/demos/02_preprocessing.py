"""
From raw records to baskets and cluster rows
============================================
"""

import datetime as dt

from loanmine import SyntheticConfig, generate_synthetic
from loanmine.preprocess import (
    academic_year,
    build_baskets,
    build_cluster_instances,
    grade_level,
    lifespan_bucket,
    parse_lc,
)

# grade levels come from CGPA rounded to two places
for cgpa in (3.5, 3.49, 2.5, 1.99):
    print(cgpa, "->", grade_level(cgpa).label)

# call numbers reduce to (class, subclass)
print(parse_lc("QA76.73 R87"), parse_lc("KPT3475 .A3"))

# academic years start on 1 August
print(academic_year(dt.date(2016, 7, 31)), academic_year(dt.date(2016, 8, 1)))
print(lifespan_bucket(17).label)

data = generate_synthetic(SyntheticConfig(seed=1, n_students=100, n_checkouts=800))

# one basket per borrowing student: a faculty tag plus subclass labels
baskets = build_baskets(data.circulation, data.items, data.students)
print(baskets[0])

# one row per check-out for the faculty / subclass / lifespan schema
rows = build_cluster_instances(data.circulation, data.items, data.students, "fsl", data.patrons)
print(rows[:3])
