from __future__ import annotations

from raagtree.main import main

raise SystemExit(main())
