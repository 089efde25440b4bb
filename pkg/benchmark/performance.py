from metsheafpy.projective import LatticeSheafSpec, build_lattice_sheaf, orthogonality_forcing
from metsheafpy.wavepacket import exact_propagator, propagator
from metsheafpy.sheaf import Resolution
import matplotlib.pyplot as plt
from timeit import default_timer as timer
import numpy as np
from pathlib import Path
import sys
import os
current_folder = Path(__file__).absolute().parent
new_wd = os.path.join(current_folder.parent)
os.chdir(new_wd)
sys.path.append(new_wd)


# time of orthogonality forcing against the number of sections
res = Resolution(grid=3, family_size=8, max_refinement=1)
sheaf = build_lattice_sheaf(LatticeSheafSpec.diagonal(np.arange(1.0, 18.0)))
sizes = np.arange(1, 17)
t = np.zeros(len(sizes))
for i, n in enumerate(sizes):
    tic = timer()
    orthogonality_forcing(sheaf, int(n), 1e-9, res)
    toc = timer()
    t[i] = toc - tic

# relative error of the imperfect propagator against tau
taus = np.logspace(-4, -1, 30)
exact = exact_propagator(1.0, 0.0, 1.0)
err = [abs(propagator(1.0, 0.0, 1.0, tau) - exact) / abs(exact) for tau in taus]

fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
left.plot(sizes, t, marker='.')
left.set_xlabel('number of sections')
left.set_ylabel('time(s)')
left.set_title('Time for orthogonality forcing')
right.loglog(taus, err, marker='.', label='relative error')
right.loglog(taus, taus ** 2, linestyle='--', label='tau^2')
right.set_xlabel('tau')
right.set_title('Imperfect propagator')
right.legend()
os.chdir(current_folder)
plt.savefig('performance.png')
