atoms 2
conduniv E={a,b}
