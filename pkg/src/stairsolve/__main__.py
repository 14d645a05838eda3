from stairsolve import main

main()
