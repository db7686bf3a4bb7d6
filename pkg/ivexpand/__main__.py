from ivexpand.cli import main

raise SystemExit(main())
