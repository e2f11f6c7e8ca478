"""Device-independent entanglement-depth witnesses built on the I_n Bell family.

Modules: ``correl`` (data model, functionals), ``localset`` (local bounds,
facets), ``quantum`` (qubit strategies, see-saw), ``bounds`` (producibility
bounds), ``certify`` (depth certification from counts), ``sdpexport``
(moment-matrix SDP export), ``tables`` (published-value reproduction) and the
``cli`` front end.
"""

__version__ = "0.1.0"
