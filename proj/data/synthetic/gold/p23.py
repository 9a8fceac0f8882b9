def fibonacci(n):
    a = 0
    b = 1
    while a < n:
        print(a)
        a, b = b, a + b

fibonacci(10)
